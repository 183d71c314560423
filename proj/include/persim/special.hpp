// Special functions of the correlation family C_{p,H}: the psi primitive,
// the Selberg closed form for f(1,1), the double integral f over rectangles,
// the stationary correlation c_ph with bracketing bounds, and the
// exponential-weight correlation d_alpha_rho.
#pragma once

#include <cstdint>
#include <utility>

#include "persim/kernels.hpp"

namespace persim {

struct PHParams {
    double p = 0.0;
    double H = 0.75;
    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    int subdivisions = 0;
};

// int_1^x y^alpha dy, continuous across alpha = -1.
double psi(double alpha, double x);

// f(1,1) in closed form: Beta(p+1, 2H-1) / (p+H), via log-Gamma.
double selberg_f11(const PHParams& params);

// f(a,b) = int_0^a int_0^b x^p y^p |x-y|^(2H-2) dx dy by adaptive
// quadrature (scaling reduction to f(1, b/a), series tail for large b/a).
QuadratureResult f_ph(const PHParams& params, double a, double b);

// Precomputes the expensive f(1,1) and f(1,S) quadratures once so a whole
// tau-grid of correlation values is cheap. Overflow-safe for large tau.
class CphEvaluator {
public:
    explicit CphEvaluator(PHParams params);
    double operator()(double tau) const;
    double f11() const { return f11_; }
    const PHParams& params() const { return params_; }

private:
    PHParams params_;
    double f11_ = 0.0;
    double f1_split_ = 0.0;
};

// Stationary correlation e^{-tau(p+H)} f(1,e^tau) / f(1,1).
double c_ph(const PHParams& params, double tau);

// Bracket for c_ph(tau) implied by the psi bounds on f(1,e^tau) at cut N;
// requires e^tau >= N >= 1.
std::pair<double, double> c_ph_bounds(const PHParams& params, double tau, double N);

// Explicit constant M with c_ph(tau) <= M * max(tau e^{-tau(p+H)},
// e^{-tau(1-H)}) for all tau >= 0, assembled from the N=2 upper bound.
double c_ph_envelope_constant(const PHParams& params);

// Correlation of the limiting sequence for exponential weights:
// sum_{i,j} e^{-(i+j)alpha} rho(i-j-tau) / same at tau=0. Kernel must be
// summable; both series truncated with a certified geometric tail bound.
double d_alpha_rho(double alpha, const CorrelationKernel& kernel, int64_t tau);

} // namespace persim
