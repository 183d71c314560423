#include "persim/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "persim/rng.hpp"
#include "persim/wls.hpp"

namespace persim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<double>& prime_roots(size_t dims) {
    static std::vector<double> roots = [] {
        // sqrt of the first ~5000 primes: Richtmyer lattice generators
        constexpr int limit = 50000;
        std::vector<bool> sieve(limit, true);
        std::vector<double> out;
        for (int i = 2; i < limit; ++i) {
            if (!sieve[i]) continue;
            out.push_back(std::sqrt(static_cast<double>(i)));
            for (int j = 2 * i; j < limit; j += i) sieve[j] = false;
        }
        return out;
    }();
    if (dims > roots.size())
        throw std::invalid_argument("orthant_qmc: dimension beyond lattice table");
    return roots;
}

struct PivotedCholesky {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> L;
    int64_t n = 0;
};

// Lower Cholesky with symmetric pivoting by smallest remaining conditional
// variance; zero pivots give a zero column (degenerate coordinate).
PivotedCholesky pivoted_cholesky(const Eigen::MatrixXd& input) {
    const int64_t n = input.rows();
    Eigen::MatrixXd a = input; // full symmetric copy, Schur-updated in place
    const double max_diag = a.diagonal().maxCoeff();
    const double degenerate_tol = 1e-10 * max_diag;
    const double psd_tol = -1e-8 * max_diag;

    PivotedCholesky out;
    out.n = n;
    out.L.setZero(n, n);

    for (int64_t i = 0; i < n; ++i) {
        int64_t jmin = i;
        for (int64_t j = i + 1; j < n; ++j)
            if (a(j, j) < a(jmin, jmin)) jmin = j;
        if (jmin != i) {
            a.row(i).swap(a.row(jmin));
            a.col(i).swap(a.col(jmin));
            out.L.row(i).swap(out.L.row(jmin));
        }
        const double d = a(i, i);
        if (d < psd_tol)
            throw std::runtime_error("orthant_qmc: matrix fails the PSD tolerance");
        if (d <= degenerate_tol) continue; // conditionally deterministic coordinate
        const double s = std::sqrt(d);
        const int64_t rest = n - i - 1;
        out.L(i, i) = s;
        if (rest > 0) {
            Eigen::VectorXd col = a.col(i).segment(i + 1, rest) / s;
            for (int64_t k = 0; k < rest; ++k) out.L(i + 1 + k, i) = col[k];
            a.block(i + 1, i + 1, rest, rest).noalias() -= col * col.transpose();
        }
    }
    return out;
}

// One integrand evaluation of the sequential-conditioning representation.
double genz_point(const PivotedCholesky& chol, double r, const double* w,
                  std::vector<double>& y) {
    const int64_t n = chol.n;
    double prod = 1.0;
    for (int64_t i = 0; i < n; ++i) {
        double mean = 0.0;
        const double* row = chol.L.data() + i * n;
        for (int64_t j = 0; j < i; ++j) mean += row[j] * y[j];
        const double sd = row[i];
        double e;
        if (sd > 0.0) {
            e = norm_cdf((r - mean) / sd);
        } else {
            e = (r - mean) > 0.0 ? 1.0 : 0.0;
        }
        prod *= e;
        if (prod <= 0.0) return 0.0;
        if (i + 1 < n) {
            if (sd > 0.0) {
                const double u = std::max(w[i] * e, 1e-300);
                y[i] = norm_quantile(std::min(u, 1.0 - 1e-16));
            } else {
                y[i] = 0.0;
            }
        }
    }
    return prod;
}

// Geometric first row => AR(1) structure (exponential-kernel grids).
std::optional<double> detect_markov(const GramMatrix& gram) {
    if (gram.kind != GramKind::stationary_toeplitz || gram.size() < 3) return std::nullopt;
    const int64_t n = gram.size();
    const double q = gram.m(0, 1);
    if (!(q > 0.0 && q < 1.0)) return std::nullopt;
    double qk = 1.0;
    for (int64_t k = 0; k < n; ++k) {
        if (std::fabs(gram.m(0, k) - qk) > 1e-12 * (1.0 + qk)) return std::nullopt;
        qk *= q;
    }
    return q;
}

// For an AR(1) chain the orthant probability is exactly computable: iterate
// the sub-Markov transfer operator f_{i+1}(y) = int_{-inf}^r N(y; q x, s^2)
// f_i(x) dx on a composite Gauss-Legendre grid over [r - 14, r],
// renormalizing each step and accumulating the log survival mass.
double markov_orthant_log(int64_t n, double q, double r, int panels) {
    constexpr double kWindow = 14.0;
    constexpr int kPerPanel = 8;
    const double s = std::sqrt(1.0 - q * q);
    const int nodes = panels * kPerPanel;

    static const double gl8_x[4] = {0.1834346424956498, 0.5255324099163290,
                                    0.7966664774136267, 0.9602898564975363};
    static const double gl8_w[4] = {0.3626837833783620, 0.3137066458778873,
                                    0.2223810344533745, 0.1012285362903763};
    std::vector<double> x(nodes), w(nodes);
    const double width = kWindow / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = r - kWindow + (p + 0.5) * width;
        for (int g = 0; g < 4; ++g) {
            const double dx = 0.5 * width * gl8_x[g];
            const double ww = 0.5 * width * gl8_w[g];
            x[p * kPerPanel + 2 * g] = mid - dx;
            x[p * kPerPanel + 2 * g + 1] = mid + dx;
            w[p * kPerPanel + 2 * g] = ww;
            w[p * kPerPanel + 2 * g + 1] = ww;
        }
    }

    const double inv_sqrt2pi = 0.3989422804014327;
    auto pdf = [&](double z) { return inv_sqrt2pi * std::exp(-0.5 * z * z); };

    // kernel matrix M[a][b] = w_b p(x_a | x_b)
    std::vector<double> M(static_cast<size_t>(nodes) * nodes);
#pragma omp parallel for schedule(static)
    for (int a = 0; a < nodes; ++a)
        for (int b = 0; b < nodes; ++b)
            M[static_cast<size_t>(a) * nodes + b] = w[b] * pdf((x[a] - q * x[b]) / s) / s;

    std::vector<double> f(nodes), g(nodes);
    for (int a = 0; a < nodes; ++a) f[a] = pdf(x[a]);
    double log_p = 0.0;
    for (int64_t step = 1; step < n; ++step) {
        double mass = 0.0;
        for (int a = 0; a < nodes; ++a) mass += w[a] * f[a];
        log_p += std::log(mass);
        const double inv = 1.0 / mass;
#pragma omp parallel for schedule(static)
        for (int a = 0; a < nodes; ++a) {
            double acc = 0.0;
            const double* row = M.data() + static_cast<size_t>(a) * nodes;
            for (int b = 0; b < nodes; ++b) acc += row[b] * f[b] * inv;
            g[a] = acc;
        }
        f.swap(g);
    }
    double mass = 0.0;
    for (int a = 0; a < nodes; ++a) mass += w[a] * f[a];
    return log_p + std::log(mass);
}

ProbabilityEstimate markov_orthant(int64_t n, double q, double r) {
    const double s = std::sqrt(1.0 - q * q);
    // keep the node spacing well below the transition kernel width
    const int panels = std::clamp(static_cast<int>(std::ceil(14.0 / s * 0.5)), 128, 512);
    const double fine = markov_orthant_log(n, q, r, panels);
    const double coarse = markov_orthant_log(n, q, r, panels / 2);
    ProbabilityEstimate est;
    est.method = EstimateMethod::closed_form;
    est.log_p = fine;
    est.stderr_log = std::fabs(fine - coarse);
    est.n_effective = static_cast<int64_t>(panels) * 8;
    return est;
}

} // namespace

const char* method_name(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::mc: return "mc";
        case EstimateMethod::orthant_qmc: return "orthant-qmc";
        case EstimateMethod::closed_form: return "closed-form";
    }
    return "?";
}

ProbabilityEstimate persistence_mc(const PathBatch& paths, double r) {
    return persistence_mc(paths, r, paths.n);
}

ProbabilityEstimate persistence_mc(const PathBatch& paths, double r, int64_t n_prefix) {
    if (paths.R < 1) throw std::invalid_argument("persistence_mc: empty batch");
    if (n_prefix < 1 || n_prefix > paths.n)
        throw std::invalid_argument("persistence_mc: bad prefix length");
    int64_t hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static)
    for (int64_t rep = 0; rep < paths.R; ++rep) {
        const double* row = paths.values.data() + rep * paths.n;
        bool below = true;
        for (int64_t i = 0; i < n_prefix; ++i) {
            if (row[i] >= r) {
                below = false;
                break;
            }
        }
        hits += below;
    }
    return estimate_from_hits(hits, paths.R);
}

ProbabilityEstimate estimate_from_hits(int64_t hits, int64_t replications) {
    ProbabilityEstimate est;
    est.method = EstimateMethod::mc;
    est.n_effective = replications;
    est.hits = hits;
    if (hits == 0) {
        // rule of three: one-sided 95% bound p <= 3/R
        est.log_p = std::log(3.0 / static_cast<double>(replications));
        est.stderr_log = 0.0;
        est.usable = false;
        return est;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(replications);
    est.log_p = std::log(p);
    est.stderr_log = std::sqrt((1.0 - p) / (p * static_cast<double>(replications)));
    return est;
}

ProbabilityEstimate orthant_qmc(const GramMatrix& gram, double r, int64_t budget,
                                uint64_t seed, const OrthantOptions& opts) {
    const int64_t n = gram.size();
    if (n > opts.max_dimension)
        throw std::invalid_argument("orthant_qmc: dimension beyond cap");
    ProbabilityEstimate est;
    est.method = EstimateMethod::orthant_qmc;
    if (n == 1) {
        est.method = EstimateMethod::closed_form;
        est.log_p = std::log(norm_cdf(r));
        est.n_effective = 1;
        return est;
    }

    // AR(1) grids (geometric Toeplitz) collapse to an exact 1-D transfer
    // operator; everything else goes through randomized-QMC conditioning.
    if (const auto markov_q = detect_markov(gram)) return markov_orthant(n, *markov_q, r);

    PivotedCholesky chol = pivoted_cholesky(gram.m);
    const size_t dims = static_cast<size_t>(n - 1);
    const auto& roots = prime_roots(dims);
    const int shifts = opts.shifts;

    int64_t points = std::max<int64_t>(256, budget / (shifts * 8));
    int64_t used = 0;
    double best_p = 0.0, best_se = kInf;
    bool met = false;

    while (true) {
        std::vector<double> shift_means(shifts, 0.0);
#pragma omp parallel
        {
            std::vector<double> w(dims), wa(dims), y(static_cast<size_t>(n), 0.0);
#pragma omp for schedule(static)
            for (int s = 0; s < shifts; ++s) {
                CounterRng rng(seed, 0xABCD0000u + static_cast<uint64_t>(s));
                std::vector<double> delta(dims);
                for (size_t j = 0; j < dims; ++j) delta[j] = rng.uniform_at(j);
                double acc = 0.0;
                for (int64_t k = 1; k <= points; ++k) {
                    for (size_t j = 0; j < dims; ++j) {
                        double v = static_cast<double>(k) * roots[j] + delta[j];
                        v -= std::floor(v);
                        w[j] = v;
                        wa[j] = 1.0 - v;
                    }
                    const double fw = genz_point(chol, r, w.data(), y);
                    const double fa = genz_point(chol, r, wa.data(), y);
                    acc += 0.5 * (fw + fa);
                }
                shift_means[s] = acc / static_cast<double>(points);
            }
        }
        used += 2 * points * shifts;
        double mean = 0.0;
        for (double v : shift_means) mean += v;
        mean /= shifts;
        double var = 0.0;
        for (double v : shift_means) var += (v - mean) * (v - mean);
        const double se = std::sqrt(var / (shifts * (shifts - 1.0)));

        best_p = mean;
        best_se = se;
        const double target = (mean >= 1e-6) ? opts.rel_target : 0.05;
        met = mean > 0.0 && se <= target * mean;
        if (met || 2 * points * shifts * 2 > budget) break;
        points *= 2;
    }

    est.n_effective = used;
    est.target_met = met;
    if (best_p <= 0.0) {
        est.log_p = -kInf;
        est.stderr_log = kInf;
        est.usable = false;
        return est;
    }
    est.log_p = std::log(best_p);
    est.stderr_log = best_se / best_p;
    return est;
}

ExponentFit exponent_fit_loglog(const std::vector<LadderPoint>& points,
                                const WeightSequence& weights, Regressor regressor) {
    if (regressor == Regressor::linear_T)
        throw std::invalid_argument("exponent_fit_loglog: regressor must be log-s or log-n");
    std::vector<double> x, y, w;
    for (const auto& pt : points) {
        if (!pt.estimate.usable || !std::isfinite(pt.estimate.log_p)) continue;
        x.push_back(regressor == Regressor::log_s ? std::log(weights.s(pt.abscissa))
                                                  : std::log(pt.abscissa));
        y.push_back(pt.estimate.log_p);
        const double se = std::max(pt.estimate.stderr_log, 1e-12);
        w.push_back(1.0 / (se * se));
    }
    if (x.size() < 3)
        throw std::invalid_argument("exponent_fit_loglog: fewer than 3 usable points");
    const WlsFit fit = wls_fit(x, y, w);
    ExponentFit out;
    out.exponent = fit.slope;
    out.ci95 = {fit.slope - 1.96 * fit.slope_se, fit.slope + 1.96 * fit.slope_se};
    out.regressor = regressor;
    out.points_used = fit.n;
    out.r_squared = fit.r_squared;
    return out;
}

LinearFitResult exponent_fit_linear(const std::vector<LadderPoint>& points) {
    std::vector<double> x, y, w;
    LinearFitResult out;
    for (const auto& pt : points) {
        if (!pt.estimate.usable || !std::isfinite(pt.estimate.log_p)) continue;
        x.push_back(pt.abscissa);
        y.push_back(-pt.estimate.log_p);
        const double se = std::max(pt.estimate.stderr_log, 1e-12);
        w.push_back(1.0 / (se * se));
        out.fekete.emplace_back(pt.abscissa, -pt.estimate.log_p / pt.abscissa);
    }
    if (x.size() < 3)
        throw std::invalid_argument("exponent_fit_linear: fewer than 3 usable points");
    const WlsFit fit = wls_fit(x, y, w);
    out.fit.exponent = fit.slope;
    out.fit.ci95 = {fit.slope - 1.96 * fit.slope_se, fit.slope + 1.96 * fit.slope_se};
    out.fit.regressor = Regressor::linear_T;
    out.fit.points_used = fit.n;
    out.fit.r_squared = fit.r_squared;
    return out;
}

DichotomyResult theta_dichotomy(const std::function<double(double)>& corr,
                                CorrIntegrability declared, double delta,
                                uint64_t seed) {
    DichotomyResult out;
    bool integrable;
    if (declared == CorrIntegrability::fit_from_samples) {
        // log-log tail slope over the largest decade of a T=256 horizon
        const double t_max = 256.0;
        std::vector<double> lx, ly, lw;
        for (double t = t_max / 10.0; t <= t_max; t *= 1.25) {
            const double a = corr(t);
            if (a < 0.0)
                throw std::invalid_argument("theta_dichotomy: correlation must be nonnegative");
            if (a > 0.0) {
                lx.push_back(std::log(t));
                ly.push_back(std::log(a));
                lw.push_back(1.0);
            }
        }
        if (lx.size() < 4 || corr(t_max) >= corr(t_max / 10.0))
            throw std::invalid_argument("theta_dichotomy: tail decay not fittable");
        out.fitted_slope = wls_fit(lx, ly, lw).slope;
        integrable = out.fitted_slope < -1.0;
    } else {
        integrable = declared == CorrIntegrability::integrable;
        out.fitted_slope = 0.0;
    }
    out.cls = integrable ? ThetaClass::positive : ThetaClass::zero;

    // corroborating Fekete sequence at four doubling horizons
    for (double T : {5.0, 10.0, 20.0, 40.0}) {
        const int64_t m = static_cast<int64_t>(std::llround(T / delta));
        GramMatrix gram = gram_stationary(corr, delta, m, "dichotomy");
        const auto est = orthant_qmc(gram, 0.0, int64_t{1} << 15, seed);
        out.fekete.emplace_back(T, -est.log_p / T);
    }
    return out;
}

SlepianReport slepian_block_check(const GramMatrix& gram, double r, int64_t split,
                                  uint64_t seed, int64_t budget) {
    const int64_t n = gram.size();
    if (split < 1 || split >= n)
        throw std::invalid_argument("slepian_block_check: split must lie in [1, n)");
    if (gram.m.minCoeff() < 0.0)
        throw std::invalid_argument("slepian_block_check: needs nonnegative entries");

    auto block = [&](int64_t start, int64_t count) {
        GramMatrix sub;
        sub.m = gram.m.block(start, start, count, count);
        sub.kind = gram.kind;
        sub.metadata = gram.metadata + "|block";
        sub.delta = gram.delta;
        return sub;
    };
    const auto full = orthant_qmc(gram, r, budget, seed);
    const auto left = orthant_qmc(block(0, split), r, budget, seed + 1);
    const auto right = orthant_qmc(block(split, n - split), r, budget, seed + 2);

    SlepianReport rep;
    rep.log_p_full = full.log_p;
    rep.log_p_left = left.log_p;
    rep.log_p_right = right.log_p;
    rep.margin = full.log_p - left.log_p - right.log_p;
    rep.combined_stderr = std::sqrt(full.stderr_log * full.stderr_log +
                                    left.stderr_log * left.stderr_log +
                                    right.stderr_log * right.stderr_log);
    rep.holds = rep.margin >= -4.0 * rep.combined_stderr - 1e-12;
    return rep;
}

std::string estimate_csv_row(const std::string& experiment_id, double abscissa,
                             const ProbabilityEstimate& est, uint64_t seed) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%s,%llu", experiment_id.c_str(),
                  abscissa, est.log_p, est.stderr_log, method_name(est.method),
                  static_cast<unsigned long long>(seed));
    return buf;
}

} // namespace persim
