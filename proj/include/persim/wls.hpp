// Two-parameter weighted least squares with inverse-variance weights.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace persim {

struct WlsFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double intercept_se = 0.0;
    double r_squared = 0.0;
    int n = 0;
};

inline WlsFit wls_fit(std::span<const double> x, std::span<const double> y,
                      std::span<const double> w) {
    if (x.size() != y.size() || x.size() != w.size() || x.size() < 2)
        throw std::invalid_argument("wls_fit: need >= 2 matching points");
    const int n = static_cast<int>(x.size());
    double W = 0, mx = 0, my = 0;
    for (int i = 0; i < n; ++i) {
        W += w[i];
        mx += w[i] * x[i];
        my += w[i] * y[i];
    }
    mx /= W;
    my /= W;
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("wls_fit: degenerate abscissae");
    WlsFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    // weights interpreted as exact inverse variances
    fit.slope_se = std::sqrt(1.0 / sxx);
    fit.intercept_se = std::sqrt(1.0 / W + mx * mx / sxx);
    double ss_res = 0;
    for (int i = 0; i < n; ++i) {
        const double resid = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += w[i] * resid * resid;
    }
    fit.r_squared = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

} // namespace persim
