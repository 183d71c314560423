// Persistence-probability estimators (hit-counting Monte Carlo and
// sequential-conditioning orthant QMC), exponent extraction by weighted
// least squares, the zero/positive exponent dichotomy, and block
// comparison checks.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "persim/covariance.hpp"
#include "persim/kernels.hpp"
#include "persim/simulate.hpp"

namespace persim {

enum class EstimateMethod { mc, orthant_qmc, closed_form };

const char* method_name(EstimateMethod m);

struct ProbabilityEstimate {
    double log_p = 0.0;      // log probability, <= 0
    double stderr_log = 0.0; // delta-method standard error on the log scale
    EstimateMethod method = EstimateMethod::mc;
    int64_t n_effective = 0; // replications / integrand evaluations
    int64_t hits = -1;       // mc only
    bool usable = true;      // false: zero-hit bound, not for regressions
    bool target_met = true;  // qmc: relative-error target reached in budget
};

enum class Regressor { log_s, log_n, linear_T };

struct ExponentFit {
    double exponent = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    Regressor regressor = Regressor::log_n;
    int points_used = 0;
    double r_squared = 0.0;
};

// Fraction of rows whose running maximum over the first n_prefix entries
// stays strictly below r; binomial stderr mapped to the log scale. Zero
// hits produce the one-sided rule-of-three bound, flagged unusable.
ProbabilityEstimate persistence_mc(const PathBatch& paths, double r);
ProbabilityEstimate persistence_mc(const PathBatch& paths, double r, int64_t n_prefix);

// Hit count -> log-scale estimate (shared by the streaming ladder).
ProbabilityEstimate estimate_from_hits(int64_t hits, int64_t replications);

struct OrthantOptions {
    int shifts = 8;           // independent QMC randomizations
    double rel_target = 1e-3; // for p >= 1e-6; 5% below that
    int64_t max_dimension = 4096;
};

// P(all coordinates < r) for N(0, gram) by sequential conditioning with
// randomized Richtmyer lattices; variables ordered by smallest conditional
// variance. Geometric Toeplitz (AR(1)) inputs take an O(n)-per-point path.
ProbabilityEstimate orthant_qmc(const GramMatrix& gram, double r, int64_t budget,
                                uint64_t seed, const OrthantOptions& opts = {});

struct LadderPoint {
    double abscissa = 0.0; // n or T
    ProbabilityEstimate estimate;
};

// WLS of log q on log s(n) or log n, weights 1/stderr^2; the slope is the
// fitted exponent (negative for decaying q).
ExponentFit exponent_fit_loglog(const std::vector<LadderPoint>& points,
                                const WeightSequence& weights, Regressor regressor);

struct LinearFitResult {
    ExponentFit fit;                              // slope of -log q on T
    std::vector<std::pair<double, double>> fekete; // (T, -log q / T)
};

// Affine WLS of -log q(T) on T; the intercept absorbs subexponential
// prefactors. Also reports the Fekete diagnostic sequence a(T)/T.
LinearFitResult exponent_fit_linear(const std::vector<LadderPoint>& points);

enum class ThetaClass { positive, zero };
enum class CorrIntegrability { integrable, nonintegrable, fit_from_samples };

struct DichotomyResult {
    ThetaClass cls = ThetaClass::positive;
    double fitted_slope = 0.0; // log-log tail slope when fitted
    std::vector<std::pair<double, double>> fekete;
};

// Zero/positive classification of the persistence exponent by tail
// integrability (declared or fitted), corroborated by the empirical
// Fekete sequence at four doubling horizons.
DichotomyResult theta_dichotomy(const std::function<double(double)>& corr,
                                CorrIntegrability declared, double delta,
                                uint64_t seed);

struct SlepianReport {
    double log_p_full = 0.0;
    double log_p_left = 0.0;
    double log_p_right = 0.0;
    double margin = 0.0; // log_full - log_left - log_right, >= 0 by comparison
    double combined_stderr = 0.0;
    bool holds = false;
};

// Verifies P(max_{1..n} < r) >= P(max_{1..split} < r) P(max_{split+1..n} < r)
// on the three orthant evaluations.
SlepianReport slepian_block_check(const GramMatrix& gram, double r, int64_t split,
                                  uint64_t seed, int64_t budget = int64_t{1} << 16);

// CSV row in the estimator schema: experiment_id, n_or_T, log_p,
// stderr_log, method, seed.
std::string estimate_csv_row(const std::string& experiment_id, double abscissa,
                             const ProbabilityEstimate& est, uint64_t seed);

} // namespace persim
