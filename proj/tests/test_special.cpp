#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "persim/rng.hpp"
#include "persim/special.hpp"
#include "support/oracles.hpp"

using namespace persim;

TEST_CASE("psi closed forms and the alpha = -1 crossover") {
    CHECK(psi(0.0, std::exp(1.0)) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
    CHECK(psi(-1.0, std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(psi(1.0, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
    // near alpha = -1 the value must track the series L + eps L^2/2 +
    // eps^2 L^3/6 with no cancellation loss
    for (double x : {1.5, 3.0, 100.0}) {
        const double L = std::log(x);
        for (double eps : {1e-9, -1e-9, 3e-10, -3e-10}) {
            const double series = L + eps * L * L / 2.0 + eps * eps * L * L * L / 6.0;
            CHECK(std::fabs(psi(-1.0 + eps, x) - series) < 1e-10 * (1.0 + series));
        }
    }
    CHECK_THROWS(psi(0.0, 0.5));
}

TEST_CASE("selberg_f11 closed forms") {
    CHECK(selberg_f11({0.0, 0.75}) == doctest::Approx(8.0 / 3.0).epsilon(1e-13));
    CHECK(selberg_f11({1.0, 0.75}) == doctest::Approx(16.0 / 21.0).epsilon(1e-13));
    // p = 0: 1/(H(2H-1))
    for (int k = 0; k < 10; ++k) {
        const double H = 0.52 + 0.046 * k;
        CHECK(selberg_f11({0.0, H}) ==
              doctest::Approx(1.0 / (H * (2.0 * H - 1.0))).epsilon(1e-12));
    }
    CHECK_THROWS(selberg_f11({0.0, 0.4}));
    CHECK_THROWS(selberg_f11({-0.9, 0.8}));
}

TEST_CASE("f_ph quadrature agrees with the Selberg value on the 7x7 grid") {
    const double ps[7] = {-0.6, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0};
    for (double p : ps) {
        for (int k = 0; k < 7; ++k) {
            const double H = 0.55 + 0.4 * k / 6.0;
            if (p + H <= 0.0) continue;
            PHParams params{p, H};
            const double sel = selberg_f11(params);
            const auto q = f_ph(params, 1.0, 1.0);
            CHECK(std::fabs(q.value - sel) / sel <= 1e-6);
        }
    }
}

TEST_CASE("f_ph symmetry, scaling, monotonicity") {
    PHParams params{0.5, 0.7};
    CHECK(f_ph(params, 1.0, 3.0).value ==
          doctest::Approx(f_ph(params, 3.0, 1.0).value).epsilon(1e-10));
    CHECK(f_ph(params, 2.0, 2.0).value ==
          doctest::Approx(std::pow(2.0, 2.0 * 0.5 + 2.0 * 0.7) * f_ph(params, 1.0, 1.0).value)
              .epsilon(1e-10));

    // scaling f(la, lb) = l^{2p+2H} f(a,b) on pseudo-random parameter draws
    CounterRng rng(2024, 0);
    for (int t = 0; t < 20; ++t) {
        const double p = -0.4 + 2.0 * rng.uniform_at(4 * t);
        const double H = 0.55 + 0.4 * rng.uniform_at(4 * t + 1);
        if (p + H <= 0.05) continue;
        PHParams ph{p, H};
        const double a = 0.5 + 2.0 * rng.uniform_at(4 * t + 2);
        const double b = 0.5 + 2.0 * rng.uniform_at(4 * t + 3);
        const double lam = 1.7;
        const double lhs = f_ph(ph, lam * a, lam * b).value;
        const double rhs = std::pow(lam, 2.0 * p + 2.0 * H) * f_ph(ph, a, b).value;
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }

    double prev = 0.0;
    for (double b : {1.0, 1.5, 2.0, 4.0, 10.0, 100.0}) {
        const double v = f_ph(params, 1.0, b).value;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("f_ph series tail matches the exact cell sum (p = 0)") {
    // p = 0 makes the cell-sum oracle exact up to rounding
    const double quad = f_ph({0.0, 0.75}, 1.0, 18.0).value;
    const double cells = oracles::f_ph_cellsum(0.0, 0.75, 1.0, 18.0, 1e-2);
    CHECK(quad == doctest::Approx(cells).epsilon(1e-10));
}

TEST_CASE("f_ph rejects bad inputs") {
    CHECK_THROWS(f_ph({0.0, 0.75}, 0.0, 1.0));
    CHECK_THROWS(f_ph({0.0, 0.75}, 1.0, -2.0));
}

TEST_CASE("c_ph basics and frozen oracle values") {
    PHParams params{0.0, 0.75};
    CHECK(c_ph(params, 0.0) == 1.0);

    const double v1 = c_ph(params, 1.0);
    CHECK(v1 >= std::exp(-0.75));
    CHECK(v1 <= 1.0);

    // frozen: cell-sum oracle at 1e-4 resolution (exact for p = 0)
    CHECK(v1 == doctest::Approx(0.76270887804932).epsilon(1e-9));
    CHECK(c_ph(params, 2.0) == doctest::Approx(0.55070606769731).epsilon(1e-9));
    // p = 0.5 frozen at 2e-4 resolution (midpoint bias ~ h^2)
    CHECK(c_ph({0.5, 0.7}, 1.0) == doctest::Approx(0.5675879309).epsilon(1e-6));

    // in-test coarse cross-check of the oracle route itself
    CHECK(oracles::c_ph_cellsum(0.0, 0.75, 1.0, 5e-3) ==
          doctest::Approx(0.76270887804932).epsilon(1e-9));
}

TEST_CASE("c_ph evaluator handles large and huge tau") {
    CphEvaluator ev({0.5, 0.7});
    // series path continuous across the split
    const double below = ev(std::log(16.0) - 1e-9);
    const double above = ev(std::log(16.0) + 1e-9);
    CHECK(below == doctest::Approx(above).epsilon(1e-7));
    CHECK(ev(400.0) > 0.0);
    CHECK(ev(400.0) < 1e-40);
    CHECK_THROWS(ev(-0.5));
}

TEST_CASE("c_ph_bounds bracket and degenerate interval") {
    auto [l0, u0] = c_ph_bounds({0.0, 0.75}, 0.0, 1.0);
    CHECK(l0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u0 == doctest::Approx(1.0).epsilon(1e-12));

    PHParams params{0.0, 0.75};
    const double v = c_ph(params, 2.0);
    auto [lo, hi] = c_ph_bounds(params, 2.0, 2.0);
    CHECK(lo <= v + 1e-8);
    CHECK(v <= hi + 1e-8);
    // the bracket contains the independently frozen value as well
    CHECK(lo <= 0.55070606769731 + 1e-8);
    CHECK(0.55070606769731 <= hi + 1e-8);
    CHECK_THROWS(c_ph_bounds(params, 0.1, 2.0)); // e^tau < N
}

TEST_CASE("c_ph lower bound and tail envelope") {
    for (const PHParams params : {PHParams{0.0, 0.75}, PHParams{0.5, 0.7}, PHParams{1.0, 0.55}}) {
        CphEvaluator ev(params);
        const double M = c_ph_envelope_constant(params);
        const double pH = params.p + params.H;
        for (double tau = 0.1; tau <= 5.0 + 1e-9; tau += 0.1) {
            const double v = ev(tau);
            CHECK(v >= std::exp(-pH * tau) - 1e-8);
            const double envelope =
                M * std::max(tau * std::exp(-tau * pH), std::exp(-tau * (1.0 - params.H)));
            CHECK(v <= envelope + 1e-8);
        }
    }
}

TEST_CASE("d_alpha_rho structure") {
    auto delta = CorrelationKernel::kronecker_delta();
    CHECK(d_alpha_rho(0.5, delta, 0) == doctest::Approx(1.0).epsilon(1e-12));
    for (double alpha : {0.25, 0.5, 1.0}) {
        for (int64_t tau : {1, 2, 5}) {
            CHECK(d_alpha_rho(alpha, delta, tau) ==
                  doctest::Approx(std::exp(-alpha * static_cast<double>(tau))).epsilon(1e-9));
        }
    }

    auto expk = CorrelationKernel::exponential(1.0);
    const double v = d_alpha_rho(0.5, expk, 1);
    CHECK(v > 0.0);
    CHECK(v < 1.0);
    CHECK(v == doctest::Approx(oracles::d_alpha_rho_brute(0.5, expk, 1, 200)).epsilon(1e-9));

    CHECK_THROWS(d_alpha_rho(0.5, CorrelationKernel::fgn(0.75), 1));
    CHECK_THROWS(d_alpha_rho(-0.5, delta, 1));
}

TEST_CASE("d_alpha_rho generates a PSD Toeplitz correlation") {
    auto expk = CorrelationKernel::exponential(0.7);
    const int n = 32;
    Eigen::MatrixXd T(n, n);
    std::vector<double> d(n);
    for (int k = 0; k < n; ++k) d[k] = d_alpha_rho(0.4, expk, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) T(i, j) = d[std::abs(i - j)];
    for (int k = 0; k < n; ++k) CHECK(std::fabs(d[k]) <= 1.0 + 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
}
