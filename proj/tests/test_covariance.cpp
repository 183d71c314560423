#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "persim/covariance.hpp"
#include "persim/reference.hpp"
#include "persim/special.hpp"

using namespace persim;

TEST_CASE("F_rho_sigma closed-form spot checks") {
    auto delta = CorrelationKernel::kronecker_delta();
    auto ones = WeightSequence::polynomial(0.0);
    auto lin = WeightSequence::polynomial(1.0);
    CHECK(F_rho_sigma(delta, ones, 2.0, 3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(F_rho_sigma(delta, lin, 2.0, 2.0) == doctest::Approx(5.0).epsilon(1e-14));

    auto expk = CorrelationKernel::exponential(1.0);
    CHECK(F_rho_sigma(expk, ones, 1.0, 2.0) ==
          doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS(F_rho_sigma(delta, ones, 0.0, 1.0));
}

TEST_CASE("F_rho_sigma fractional arguments are exact cell integrals") {
    auto delta = CorrelationKernel::kronecker_delta();
    auto ones = WeightSequence::polynomial(0.0);
    // int over [0,1.5]^2 of delta(ceil x - ceil y): first cell 1.0,
    // second partial cell 0.5^2... plus cross terms vanish
    CHECK(F_rho_sigma(delta, ones, 1.5, 1.5) == doctest::Approx(1.0 + 0.25).epsilon(1e-14));
    // symmetric in arguments
    auto expk = CorrelationKernel::exponential(0.3);
    auto lin = WeightSequence::polynomial(1.0);
    CHECK(F_rho_sigma(expk, lin, 2.7, 5.3) ==
          doctest::Approx(F_rho_sigma(expk, lin, 5.3, 2.7)).epsilon(1e-13));
}

TEST_CASE("gram_S small cases and naive equivalence") {
    auto delta = CorrelationKernel::kronecker_delta();
    auto ones = WeightSequence::polynomial(0.0);
    auto g = gram_S(delta, ones, 2);
    CHECK(g.m(0, 0) == 1.0);
    CHECK(g.m(0, 1) == 1.0);
    CHECK(g.m(1, 0) == 1.0);
    CHECK(g.m(1, 1) == 2.0);

    // diagonal entries are the full double sums
    auto fgn = CorrelationKernel::fgn(0.75);
    auto g2 = gram_S(fgn, ones, 16);
    for (int k = 1; k <= 16; ++k) {
        double expect = 0.0;
        for (int i = 1; i <= k; ++i)
            for (int j = 1; j <= k; ++j) expect += fgn.rho(std::abs(i - j));
        CHECK(g2.m(k - 1, k - 1) == doctest::Approx(expect).epsilon(1e-13));
    }

    // bit-exact match with the naive O(n^4) reference
    for (const auto& kernel :
         {CorrelationKernel::exponential(0.8), CorrelationKernel::fgn(0.7)}) {
        for (const auto& wts : {WeightSequence::polynomial(0.5), WeightSequence::log_scale()}) {
            auto fast = gram_S(kernel, wts, 64);
            auto naive = reference::gram_S_naive(kernel, wts, 64);
            CHECK((fast.m - naive).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("gram_S entries nonnegative and PSD for built-in pairs up to n=512") {
    const CorrelationKernel kernels[] = {
        CorrelationKernel::kronecker_delta(), CorrelationKernel::exponential(1.0),
        CorrelationKernel::polynomial_summable(2.0), CorrelationKernel::fgn(0.75)};
    const WeightSequence weights[] = {
        WeightSequence::polynomial(0.0), WeightSequence::polynomial(1.0),
        WeightSequence::log_scale(), WeightSequence::stretched_exponential(0.5, 0.5)};
    for (const auto& k : kernels) {
        for (const auto& w : weights) {
            if (w.family() == WeightFamily::stretched_exponential) {
                // e^{gamma sqrt(i)} overflows the Gram scale long before 512
                auto g = gram_S(k, w, 128);
                CHECK(g.m.minCoeff() >= 0.0);
            } else {
                auto g = gram_S(k, w, 512);
                CHECK(g.m.minCoeff() >= 0.0); // validate_gram ran in gram_S
            }
        }
    }
}

TEST_CASE("gram_stationary Toeplitz") {
    auto g = gram_stationary([](double t) { return std::exp(-t); }, std::log(2.0), 3, "ou");
    CHECK(g.m(0, 0) == doctest::Approx(1.0));
    CHECK(g.m(0, 1) == doctest::Approx(0.5));
    CHECK(g.m(0, 2) == doctest::Approx(0.25));
    CHECK(g.m(1, 2) == doctest::Approx(0.5));

    auto one = gram_stationary([](double) { return 1.0; }, 0.1, 1);
    CHECK(one.size() == 1);
    CHECK(one.m(0, 0) == 1.0);

    CHECK_THROWS(gram_stationary([](double) { return 0.5; }, 0.1, 3));
    CHECK_THROWS(gram_stationary([](double t) { return std::exp(-t); }, 0.0, 3));

    // c_ph grid correlation is PSD at tolerance
    CphEvaluator ev({0.0, 0.75});
    auto gc = gram_stationary([&](double t) { return ev(t); }, 0.1, 128, "cph");
    CHECK(gc.size() == 128);
}

TEST_CASE("limit_ratio_summable approaches 1 + 2 sum rho") {
    auto delta = CorrelationKernel::kronecker_delta();
    auto lin = WeightSequence::polynomial(1.0);
    CHECK(limit_ratio_summable(delta, lin, 1000.0, 1.0) == doctest::Approx(1.0).epsilon(0.02));
    CHECK(limit_ratio_summable(delta, lin, 1000.0, 2.0) == doctest::Approx(1.0).epsilon(0.02));

    auto expk = CorrelationKernel::exponential(1.0);
    auto ones = WeightSequence::polynomial(0.0);
    const double limit = 1.0 + 2.0 / (std::exp(1.0) - 1.0);
    CHECK(limit_ratio_summable(expk, ones, 1000.0, 1.0) ==
          doctest::Approx(limit).epsilon(0.02));

    // b-invariance within 3% across b in {1, 2, e} at u = 1e3
    for (const auto& pair :
         {std::pair{delta, lin}, {expk, ones},
          {CorrelationKernel::polynomial_summable(2.0), WeightSequence::polynomial(0.5)}}) {
        const double r1 = limit_ratio_summable(pair.first, pair.second, 1000.0, 1.0);
        for (double b : {2.0, std::exp(1.0)}) {
            const double rb = limit_ratio_summable(pair.first, pair.second, 1000.0, b);
            CHECK(std::fabs(rb / r1 - 1.0) <= 0.03);
        }
    }
    CHECK_THROWS(limit_ratio_summable(CorrelationKernel::fgn(0.75), ones, 100.0, 1.0));
}

TEST_CASE("limit_ratio_nonsummable approaches kappa") {
    auto fgn = CorrelationKernel::fgn(0.75);
    auto ones = WeightSequence::polynomial(0.0);
    CHECK(limit_ratio_nonsummable(fgn, ones, 4096.0, 1.0) ==
          doctest::Approx(0.375).epsilon(0.05));
    CHECK(limit_ratio_nonsummable(fgn, ones, 4096.0, 2.0) ==
          doctest::Approx(0.375).epsilon(0.05));

    // Cauchy shrink of the ratio between u = 2^12 and u = 2^14
    const double at12 = limit_ratio_nonsummable(fgn, ones, 4096.0, 1.0);
    const double at14 = limit_ratio_nonsummable(fgn, ones, 16384.0, 1.0);
    CHECK(std::fabs(at14 - 0.375) < std::fabs(at12 - 0.375) + 1e-6);
    CHECK_THROWS(limit_ratio_nonsummable(CorrelationKernel::exponential(1.0), ones, 100.0, 1.0));
}

TEST_CASE("sup over b of |ratio - kappa| halves from u=2^12 to u=2^14") {
    auto fgn = CorrelationKernel::fgn(0.75);
    auto ones = WeightSequence::polynomial(0.0);
    auto sup_dev = [&](double u) {
        double worst = 0.0;
        for (double b : {1.0, 2.0, 4.0, 8.0})
            worst = std::max(worst,
                             std::fabs(limit_ratio_nonsummable(fgn, ones, u, b) - 0.375));
        return worst;
    };
    CHECK(sup_dev(16384.0) < 2.0 * sup_dev(4096.0));
}

TEST_CASE("gram CSV export") {
    auto g = gram_S(CorrelationKernel::kronecker_delta(), WeightSequence::polynomial(0.0), 2);
    std::ostringstream out;
    write_gram_csv(g, out);
    CHECK(out.str() ==
          "# gram,kind=weighted-sum,n=2,meta=delta|poly:p=0\n1,1\n1,2\n");
}
