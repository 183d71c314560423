// Independent brute-force oracles used only by tests. These deliberately
// avoid the library's quadrature/series machinery: plain cell sums and
// closed forms.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>

#include "persim/kernels.hpp"

namespace oracles {

// Riemann-style sum for f_{p,H}(a,b): midpoint rule in the smooth factor
// x^p y^p, exact cell integration of the singular factor |x-y|^{2H-2} via
// its second antiderivative |u|^{2H} / (2H(2H-1)). Exact (up to rounding)
// when p = 0.
inline double f_ph_cellsum(double p, double H, double a, double b, double h) {
    const auto g2 = [twoH = 2.0 * H](double u) {
        return std::pow(std::fabs(u), twoH) / (twoH * (twoH - 1.0));
    };
    const int64_t nx = static_cast<int64_t>(std::llround(a / h));
    const int64_t ny = static_cast<int64_t>(std::llround(b / h));
    const double hx = a / static_cast<double>(nx);
    const double hy = b / static_cast<double>(ny);
    double total = 0.0;
#pragma omp parallel for reduction(+ : total) schedule(static)
    for (int64_t i = 0; i < nx; ++i) {
        const double x0 = i * hx;
        const double x1 = x0 + hx;
        const double xm = std::pow(x0 + 0.5 * hx, p);
        double row = 0.0;
        for (int64_t j = 0; j < ny; ++j) {
            const double y0 = j * hy;
            const double y1 = y0 + hy;
            const double cell = g2(x1 - y0) - g2(x1 - y1) - g2(x0 - y0) + g2(x0 - y1);
            row += std::pow(y0 + 0.5 * hy, p) * cell;
        }
        total += xm * row;
    }
    return total;
}

inline double c_ph_cellsum(double p, double H, double tau, double h) {
    const double f11 = f_ph_cellsum(p, H, 1.0, 1.0, h);
    const double f1b = f_ph_cellsum(p, H, 1.0, std::exp(tau), h);
    return std::exp(-tau * (p + H)) * f1b / f11;
}

// P(X1 < 0, X2 < 0) for standard bivariate normal with correlation rho.
inline double orthant2(double rho) {
    return 0.25 + std::asin(rho) / (2.0 * M_PI);
}

// Equicorrelated trivariate orthant probability at level 0.
inline double orthant3_equicorr(double rho) {
    return 0.125 + 3.0 * std::asin(rho) / (4.0 * M_PI);
}

// Truncated double series for D_{alpha,rho} at a fixed cut M.
inline double d_alpha_rho_brute(double alpha, const persim::CorrelationKernel& kernel,
                                int64_t tau, int64_t M) {
    double num = 0.0, den = 0.0;
    for (int64_t i = 0; i <= M; ++i) {
        for (int64_t j = 0; j <= M; ++j) {
            const double w = std::exp(-(static_cast<double>(i + j)) * alpha);
            den += w * kernel.rho(std::llabs(i - j));
            num += w * kernel.rho(std::llabs(i - j - tau));
        }
    }
    return num / den;
}

} // namespace oracles
