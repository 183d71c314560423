#include "persim/special.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "persim/quadrature.hpp"

namespace persim {

namespace {

constexpr double kSplit = 16.0; // quadrature below, binomial series above
constexpr double kOuterRelTol = 1e-9;
constexpr double kInnerRelTol = 1e-11;

struct QuadStats {
    double error = 0.0;
    long panels = 0;
};

// J(x; y0, y1) = int_{y0}^{y1} y^p (y-x)^{2H-2} dy with y0 >= x, via the
// corner substitution t = (y-x)^{2H-1} that removes the singularity.
double inner_j(double x, double y0, double y1, double p, double twoHm1,
               double q, QuadStats& stats) {
    const double t0 = (y0 <= x) ? 0.0 : std::pow(y0 - x, twoHm1);
    const double t1 = std::pow(y1 - x, twoHm1);
    auto f = [&](double t) { return std::pow(x + std::pow(t, q), p); };
    auto res = quad::integrate(f, t0, t1, kInnerRelTol, 0.0, 4000);
    stats.error += res.abs_error / twoHm1;
    stats.panels += res.panels;
    return res.value / twoHm1;
}

struct PieceResult {
    double value = 0.0;
    double error = 0.0;
    long panels = 0;
    bool converged = true;

    void add(const quad::Result& r, double scale = 1.0) {
        value += scale * r.value;
        error += scale * r.abs_error;
        panels += r.panels;
        converged = converged && r.converged;
    }
};

// f(1,1) by quadrature. Integrating out the scale of the inner variable
// reduces the square exactly to B = int_0^1 u^p (1-u)^{2H-2} du, with
// f(1,1) = B / (p+H). Split at 1/2 and substitute so each singular factor
// is absorbed into the measure exactly: u^p du = dv/(1+p) on the left,
// (1-u)^{2H-2} du = -dw/(2H-1) on the right.
PieceResult square_part(const PHParams& params) {
    const double p = params.p;
    const double H = params.H;
    const double twoHm1 = 2.0 * H - 1.0;
    PieceResult out;
    auto left = [&](double v) {
        return std::pow(1.0 - std::pow(v, 1.0 / (1.0 + p)), 2.0 * H - 2.0);
    };
    out.add(quad::integrate(left, 0.0, std::pow(0.5, 1.0 + p), kOuterRelTol, 0.0),
            1.0 / (1.0 + p));
    auto right = [&](double w) {
        return std::pow(1.0 - std::pow(w, 1.0 / twoHm1), p);
    };
    out.add(quad::integrate(right, 0.0, std::pow(0.5, twoHm1), kOuterRelTol, 0.0),
            1.0 / twoHm1);
    out.value /= (p + H);
    out.error /= (p + H);
    return out;
}

// Quadrature of int_0^1 x^p J(x; 1, c) dx for 1 < c <= kSplit. The x^p
// factor is absorbed exactly on [0,1/2] by v = x^{1+p}; on [1/2,1] the
// (1-x)^{2H-1} endpoint behavior of J is linearized by 1-x = w^{1/(2H-1)}.
PieceResult strip_part(const PHParams& params, double c) {
    const double p = params.p;
    const double twoHm1 = 2.0 * params.H - 1.0;
    const double q = 1.0 / twoHm1;
    QuadStats inner;
    PieceResult out;

    auto left = [&](double v) {
        const double x = std::pow(v, 1.0 / (1.0 + p));
        return inner_j(x, 1.0, c, p, twoHm1, q, inner);
    };
    out.add(quad::integrate(left, 0.0, std::pow(0.5, 1.0 + p), kOuterRelTol, 0.0),
            1.0 / (1.0 + p));

    auto right = [&](double w) {
        const double x = 1.0 - std::pow(w, q);
        return std::pow(x, p) * inner_j(x, 1.0, c, p, twoHm1, q, inner) * q *
               std::pow(w, q - 1.0);
    };
    out.add(quad::integrate(right, 0.0, std::pow(0.5, twoHm1), kOuterRelTol, 0.0));

    out.error += inner.error;
    out.panels += inner.panels;
    return out;
}

// Coefficients of (1-u)^{2H-2} = sum_k a_k u^k (all nonnegative).
double binom_next(double& a, int k, double H) {
    a *= (2.0 - 2.0 * H + k) / (k + 1.0);
    return a;
}

// int_0^1 int_S^c x^p y^p (y-x)^{2H-2} dx dy as an exact binomial series in
// x/y <= 1/S; `scale_exp` subtracts s from every exponent so the caller can
// fold in e^{-s} without overflow (y-range expressed as exponents).
struct SeriesResult {
    double value = 0.0;
    double tail_bound = 0.0;
};

SeriesResult strip_series_scaled(const PHParams& params, double log_c, double S,
                                 double s) {
    const double p = params.p;
    const double H = params.H;
    SeriesResult out;
    double a = 1.0;
    const double log_S = std::log(S);
    double term = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double alpha1 = p + 2.0 * H - 1.0 - k; // alpha_k + 1
        // e^{-s} (psi_{alpha_k}(c) - psi_{alpha_k}(S))
        double psi_diff;
        if (std::fabs(alpha1) < 1e-12) {
            psi_diff = (log_c - log_S) * std::exp(-s);
        } else {
            psi_diff = (std::exp(alpha1 * log_c - s) - std::exp(alpha1 * log_S - s)) / alpha1;
        }
        term = a / (p + k + 1.0) * psi_diff;
        out.value += term;
        if (k >= 2 && std::fabs(term) <= 1e-15 * std::fabs(out.value)) break;
        binom_next(a, k, H);
    }
    // terms decay at least geometrically with ratio ~ 2/S past the first few
    const double r = 2.0 / S;
    out.tail_bound = std::fabs(term) * r / (1.0 - r) * 4.0;
    return out;
}

} // namespace

void PHParams::validate() const {
    if (!(H > 0.5 && H < 1.0))
        throw std::invalid_argument("PHParams: H must lie in (1/2, 1)");
    if (!(p + H > 0.0))
        throw std::invalid_argument("PHParams: p + H must be positive");
}

double psi(double alpha, double x) {
    if (!(x >= 1.0)) throw std::invalid_argument("psi: x must be >= 1");
    const double eps = alpha + 1.0;
    const double L = std::log(x);
    if (eps == 0.0) return L;
    return std::expm1(eps * L) / eps;
}

double selberg_f11(const PHParams& params) {
    params.validate();
    const double p = params.p;
    const double H = params.H;
    const double log_beta = std::lgamma(p + 1.0) + std::lgamma(2.0 * H - 1.0) -
                            std::lgamma(p + 2.0 * H);
    return std::exp(log_beta) / (p + H);
}

QuadratureResult f_ph(const PHParams& params, double a, double b) {
    params.validate();
    if (!(a > 0.0) || !(b > 0.0))
        throw std::invalid_argument("f_ph: a and b must be positive");
    if (a > b) std::swap(a, b);
    const double scale = std::pow(a, 2.0 * params.p + 2.0 * params.H);
    const double c = b / a;

    PieceResult acc = square_part(params);
    if (c > 1.0) {
        PieceResult strip = strip_part(params, std::min(c, kSplit));
        acc.value += strip.value;
        acc.error += strip.error;
        acc.panels += strip.panels;
        acc.converged = acc.converged && strip.converged;
    }
    if (c > kSplit) {
        SeriesResult series = strip_series_scaled(params, std::log(c), kSplit, 0.0);
        acc.value += series.value;
        acc.error += series.tail_bound;
    }
    if (!acc.converged)
        throw std::runtime_error("f_ph: quadrature did not converge within the subdivision cap");

    QuadratureResult out;
    out.value = scale * acc.value;
    out.abs_error_estimate = scale * acc.error;
    out.subdivisions = static_cast<int>(acc.panels);
    return out;
}

CphEvaluator::CphEvaluator(PHParams params) : params_(params) {
    params_.validate();
    PieceResult sq = square_part(params_);
    PieceResult strip = strip_part(params_, kSplit);
    if (!sq.converged || !strip.converged)
        throw std::runtime_error("c_ph: quadrature did not converge within the subdivision cap");
    f11_ = sq.value;
    f1_split_ = sq.value + strip.value;
}

double CphEvaluator::operator()(double tau) const {
    if (!(tau >= 0.0)) throw std::invalid_argument("c_ph: tau must be >= 0");
    if (tau == 0.0) return 1.0;
    const double s = tau * (params_.p + params_.H);
    if (tau <= std::log(kSplit)) {
        PieceResult strip = strip_part(params_, std::exp(tau));
        if (!strip.converged)
            throw std::runtime_error("c_ph: quadrature did not converge");
        return std::exp(-s) * (f11_ + strip.value) / f11_;
    }
    SeriesResult series = strip_series_scaled(params_, tau, kSplit, s);
    return (std::exp(-s) * f1_split_ + series.value) / f11_;
}

double c_ph(const PHParams& params, double tau) {
    return CphEvaluator(params)(tau);
}

std::pair<double, double> c_ph_bounds(const PHParams& params, double tau, double N) {
    params.validate();
    if (!(N >= 1.0)) throw std::invalid_argument("c_ph_bounds: N must be >= 1");
    if (!(tau >= 0.0)) throw std::invalid_argument("c_ph_bounds: tau must be >= 0");
    if (tau < std::log(N) - 1e-12)
        throw std::invalid_argument("c_ph_bounds: requires e^tau >= N");

    const double p = params.p;
    const double H = params.H;
    const double s = tau * (p + H);
    const double f11 = f_ph(params, 1.0, 1.0).value;
    const double f1N = (N == 1.0) ? f11 : f_ph(params, 1.0, N).value;

    // e^{-s} psi_{p+2H-2}(e^tau), assembled in exponent space
    const double alpha1 = p + 2.0 * H - 1.0;
    double psi_scaled;
    if (std::fabs(alpha1) < 1e-12) {
        psi_scaled = tau * std::exp(-s);
    } else {
        psi_scaled = (std::exp(alpha1 * tau - s) - std::exp(-s)) / alpha1;
    }

    const double lower = (std::exp(-s) * f11 + psi_scaled / (p + 1.0)) / f11;
    double upper;
    if (psi_scaled == 0.0) {
        upper = std::exp(-s) * f1N / f11;
    } else if (N == 1.0) {
        upper = INFINITY;
    } else {
        const double factor = std::pow(1.0 - 1.0 / N, 2.0 * H - 2.0);
        upper = (std::exp(-s) * f1N + factor * psi_scaled / (p + 1.0)) / f11;
    }
    return {lower, upper};
}

double c_ph_envelope_constant(const PHParams& params) {
    params.validate();
    const double p = params.p;
    const double H = params.H;
    const double f11 = f_ph(params, 1.0, 1.0).value;
    const double f12 = f_ph(params, 1.0, 2.0).value;
    const double A = f12 / f11;
    const double B = std::pow(2.0, 2.0 - 2.0 * H) / ((p + 1.0) * f11);
    const double alpha1 = p + 2.0 * H - 1.0;
    const double ln2 = std::log(2.0);
    double psi_part;
    if (std::fabs(alpha1) < 1e-9) {
        psi_part = B * 1.01;
    } else if (alpha1 > 0.0) {
        psi_part = B / alpha1;
    } else {
        psi_part = B / (-alpha1 * ln2);
    }
    return std::max(std::sqrt(2.0), A / ln2 + psi_part);
}

double d_alpha_rho(double alpha, const CorrelationKernel& kernel, int64_t tau) {
    if (!(alpha > 0.0)) throw std::invalid_argument("d_alpha_rho: alpha must be positive");
    if (tau < 0) throw std::invalid_argument("d_alpha_rho: tau must be >= 0");
    if (kernel.declared_tail().kind != TailKind::summable)
        throw std::invalid_argument("d_alpha_rho: kernel must be summable");

    // Truncate both series at M with geometric tail below 1e-10 of the
    // partial sums (the i=j=0 term already contributes rho(0)=1 to the
    // denominator).
    const double q = std::exp(-alpha);
    const double log_tail_scale = 2.0 * std::log(1.0 - q);
    int64_t M = static_cast<int64_t>(
        std::ceil((10.0 * std::log(10.0) + std::log(2.0) - log_tail_scale) / alpha)) + 1;
    M = std::min<int64_t>(M, 100000);

    std::vector<double> qs(M + 1);
    qs[0] = 1.0;
    for (int64_t i = 1; i <= M; ++i) qs[i] = qs[i - 1] * q;
    std::vector<double> rho(M + tau + 1);
    for (int64_t l = 0; l <= M + tau; ++l) rho[l] = kernel.rho(l);

    double num = 0.0;
    double den = 0.0;
    for (int64_t i = 0; i <= M; ++i) {
        for (int64_t j = 0; j <= M; ++j) {
            const double w = qs[i] * qs[j];
            den += w * rho[std::llabs(i - j)];
            num += w * rho[std::llabs(i - j - tau)];
        }
    }
    return num / den;
}

} // namespace persim
