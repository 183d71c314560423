#include "persim/covariance.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <vector>

#include <omp.h>

#include "persim/special.hpp"

namespace persim {

namespace {

constexpr double kPsdTol = 1e-8;

// Cell weights of [0, l] against the unit partition: 1 on full cells, the
// fractional overlap on the last one.
std::vector<double> weighted_sigma(const WeightSequence& weights, double l) {
    const int64_t cells = static_cast<int64_t>(std::ceil(l - 1e-15));
    std::vector<double> out(static_cast<size_t>(cells) + 1, 0.0); // 1-based
    for (int64_t i = 1; i <= cells; ++i) {
        const double overlap = std::min(l, static_cast<double>(i)) - static_cast<double>(i - 1);
        out[i] = overlap * weights.sigma(i);
    }
    return out;
}

} // namespace

double F_rho_sigma(const CorrelationKernel& kernel, const WeightSequence& weights,
                   double l1, double l2) {
    if (!(l1 > 0.0) || !(l2 > 0.0))
        throw std::invalid_argument("F_rho_sigma: arguments must be positive");
    if (l1 > l2) std::swap(l1, l2);

    // A[i] = (cell weight) * sigma(i); the integrand is constant on unit
    // squares, so the interpolated integral is this exact weighted sum.
    const std::vector<double> A = weighted_sigma(weights, l1);
    const std::vector<double> B = weighted_sigma(weights, l2);
    const int64_t na = static_cast<int64_t>(A.size()) - 1;
    const int64_t nb = static_cast<int64_t>(B.size()) - 1;

    double norm_a = 0.0, norm_b = 0.0;
    for (int64_t i = 1; i <= na; ++i) norm_a += A[i] * A[i];
    for (int64_t j = 1; j <= nb; ++j) norm_b += B[j] * B[j];
    const double cs_bound = std::sqrt(norm_a * norm_b);

    // lag 0
    double acc = 0.0;
    for (int64_t i = 1; i <= na; ++i) acc += A[i] * B[i];

    // Positive lags j - i = l and i - j = l, grouped so each lag is one rho
    // lookup.
    auto lag_mass = [&](int64_t l) {
        double m = 0.0;
        const int64_t hi_fwd = std::min(na, nb - l);
        for (int64_t i = 1; i <= hi_fwd; ++i) m += A[i] * B[i + l];
        const int64_t hi_bwd = na - l;
        for (int64_t j = 1; j <= hi_bwd; ++j) m += A[j + l] * B[j];
        return m;
    };

    if (std::isfinite(kernel.tail_sum_bound(0))) {
        // summable tail: serial scan with certified early exit
        for (int64_t l = 1; l <= nb - 1; ++l) {
            const double tail = kernel.tail_sum_bound(l - 1);
            if (2.0 * cs_bound * tail < 1e-16 * std::fabs(acc)) break;
            const double r = kernel.rho(l);
            if (r != 0.0) acc += r * lag_mass(l);
        }
        return acc;
    }

    // nonsummable tail: every lag counts; parallel fill, ordered combine
    std::vector<double> contrib(static_cast<size_t>(nb), 0.0);
#pragma omp parallel for schedule(dynamic, 64)
    for (int64_t l = 1; l <= nb - 1; ++l) contrib[l] = kernel.rho(l) * lag_mass(l);
    for (int64_t l = 1; l <= nb - 1; ++l) acc += contrib[l];
    return acc;
}

GramMatrix gram_S(const CorrelationKernel& kernel, const WeightSequence& weights,
                  int64_t n) {
    if (n < 1) throw std::invalid_argument("gram_S: n must be >= 1");

    std::vector<double> sig(static_cast<size_t>(n) + 1, 0.0);
    for (int64_t i = 1; i <= n; ++i) sig[i] = weights.sigma(i);
    std::vector<double> rho(static_cast<size_t>(n), 0.0);
    for (int64_t l = 0; l < n; ++l) rho[l] = kernel.rho(l);

    // Pass 1: C(i, l) = sum_{j<=l} sigma(j) rho(|i-j|), prefix scan per row.
    Eigen::MatrixXd C(n, n);
#pragma omp parallel for schedule(static)
    for (int64_t i = 1; i <= n; ++i) {
        double run = 0.0;
        for (int64_t l = 1; l <= n; ++l) {
            run += sig[l] * rho[std::llabs(i - l)];
            C(i - 1, l - 1) = run;
        }
    }

    // Pass 2: F(k, l) = sum_{i<=k} sigma(i) C(i, l), cumulative per column.
    GramMatrix gram;
    gram.m.resize(n, n);
    gram.kind = GramKind::weighted_sum;
    gram.metadata = kernel.id() + "|" + weights.id();
#pragma omp parallel for schedule(static)
    for (int64_t l = 0; l < n; ++l) {
        double run = 0.0;
        for (int64_t k = 0; k < n; ++k) {
            run += sig[k + 1] * C(k, l);
            gram.m(k, l) = run;
        }
    }
    validate_gram(gram);
    return gram;
}

GramMatrix gram_stationary(const std::function<double(double)>& corr, double delta,
                           int64_t m, const std::string& id) {
    if (!(delta > 0.0)) throw std::invalid_argument("gram_stationary: delta must be > 0");
    if (m < 1) throw std::invalid_argument("gram_stationary: m must be >= 1");
    std::vector<double> first_row(m);
    for (int64_t k = 0; k < m; ++k) first_row[k] = corr(k * delta);
    if (std::fabs(first_row[0] - 1.0) > 1e-12)
        throw std::invalid_argument("gram_stationary: corr(0) must equal 1");

    GramMatrix gram;
    gram.m.resize(m, m);
    gram.kind = GramKind::stationary_toeplitz;
    gram.metadata = id;
    gram.delta = delta;
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < m; ++j) gram.m(i, j) = first_row[std::llabs(i - j)];
    validate_gram(gram);
    return gram;
}

double limit_ratio_nonsummable(const CorrelationKernel& kernel,
                               const WeightSequence& weights, double u, double b) {
    const TailClass tail = kernel.declared_tail();
    if (tail.kind != TailKind::nonsummable)
        throw std::invalid_argument("limit_ratio_nonsummable: kernel tail must be nonsummable");
    const auto p = weights.polynomial_p();
    if (!p) throw std::invalid_argument("limit_ratio_nonsummable: weights must be polynomial");
    PHParams params{*p, tail.H};
    params.validate();
    if (!(u > 0.0) || !(b >= 1.0))
        throw std::invalid_argument("limit_ratio_nonsummable: need u > 0, b >= 1");
    const double F = F_rho_sigma(kernel, weights, u, b * u);
    const double denom = std::pow(u, 2.0 * *p + 2.0 * tail.H) * f_ph(params, 1.0, b).value;
    return F / denom;
}

double limit_ratio_summable(const CorrelationKernel& kernel,
                            const WeightSequence& weights, double u, double b) {
    if (kernel.declared_tail().kind != TailKind::summable)
        throw std::invalid_argument("limit_ratio_summable: kernel tail must be summable");
    if (!(u > 0.0) || !(b >= 1.0))
        throw std::invalid_argument("limit_ratio_summable: need u > 0, b >= 1");
    const double F = F_rho_sigma(kernel, weights, weights.w(u), weights.w(b * u));
    return F / (u * u);
}

double validate_gram(const GramMatrix& gram) {
    const Eigen::MatrixXd& m = gram.m;
    const int64_t n = m.rows();
    const double max_diag = m.diagonal().maxCoeff();
    if (!(m.diagonal().minCoeff() > 0.0))
        throw std::runtime_error("gram: diagonal must be positive");
    if (m.minCoeff() < 0.0)
        throw std::runtime_error("gram: negative entry outside the nonnegative-correlation regime");
    const double sym_dev = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (sym_dev > 1e-12 * max_diag) throw std::runtime_error("gram: not symmetric");

    // Large matrices: a successful Cholesky already certifies PSD.
    if (n > 1024) {
        Eigen::LLT<Eigen::MatrixXd> llt(m);
        if (llt.info() == Eigen::Success) return std::nan("");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -kPsdTol * max_diag)
        throw std::runtime_error("gram: PSD violation beyond tolerance (min eigenvalue " +
                                 std::to_string(min_eig) + ")");
    return min_eig;
}

void write_gram_csv(const GramMatrix& gram, std::ostream& out) {
    const char* kind = gram.kind == GramKind::weighted_sum ? "weighted-sum" : "stationary-toeplitz";
    out << "# gram,kind=" << kind << ",n=" << gram.size() << ",meta=" << gram.metadata;
    if (gram.kind == GramKind::stationary_toeplitz) out << ",delta=" << gram.delta;
    out << "\n";
    char buf[32];
    for (int64_t i = 0; i < gram.size(); ++i) {
        for (int64_t j = 0; j < gram.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", gram.m(i, j));
            out << buf << (j + 1 < gram.size() ? "," : "\n");
        }
    }
}

} // namespace persim
