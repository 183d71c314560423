// Adaptive panel integration: Gauss-Kronrod 7/15 per panel, bisection on
// the worst panels until the apportioned tolerance is met.
#pragma once

#include <cmath>
#include <utility>
#include <vector>

namespace persim::quad {

struct Result {
    double value = 0.0;
    double abs_error = 0.0;
    int panels = 0;
    bool converged = true;
};

namespace detail {

// Kronrod-15 nodes (positive half) and weights; rows 1,3,5,7 embed Gauss-7.
inline constexpr double kNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0};
inline constexpr double kWeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWeightsG[8] = {
    0.0, 0.129484966168870, 0.0, 0.279705391489277,
    0.0, 0.381830050505119, 0.0, 0.417959183673469};

template <class F>
std::pair<double, double> gk15(F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double k = kWeightsK[7] * f0;
    double g = kWeightsG[7] * f0;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kNodes[i];
        const double fi = f(mid + dx) + f(mid - dx);
        k += kWeightsK[i] * fi;
        g += kWeightsG[i] * fi;
    }
    k *= half;
    g *= half;
    return {k, std::fabs(k - g)};
}

} // namespace detail

template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 0.0, int max_panels = 20000) {
    Result res;
    if (a == b) return res;

    struct Panel {
        double a, b, value, error;
    };
    auto [v0, e0] = detail::gk15(f, a, b);
    std::vector<Panel> work{{a, b, v0, e0}};
    double total = v0;
    double done_value = 0.0;
    double done_error = 0.0;
    const double span = std::fabs(b - a);
    res.panels = 1;

    while (!work.empty()) {
        Panel p = work.back();
        work.pop_back();
        const double tol =
            std::max(abs_tol, rel_tol * std::fabs(total)) * (std::fabs(p.b - p.a) / span);
        const bool width_floor = std::fabs(p.b - p.a) <= 1e-15 * span;
        if (p.error <= tol || width_floor) {
            done_value += p.value;
            done_error += p.error;
            continue;
        }
        if (res.panels >= max_panels) {
            // give up on refinement; keep the current estimate
            done_value += p.value;
            done_error += p.error;
            res.converged = false;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        auto [vl, el] = detail::gk15(f, p.a, mid);
        auto [vr, er] = detail::gk15(f, mid, p.b);
        total += (vl + vr) - p.value;
        work.push_back({p.a, mid, vl, el});
        work.push_back({mid, p.b, vr, er});
        res.panels += 2;
    }
    res.value = done_value;
    res.abs_error = done_error;
    return res;
}

} // namespace persim::quad
