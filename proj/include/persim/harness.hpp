// Experiment runner: declarative JSON configs, the simulate->estimate
// pipeline over n- or T-ladders, reproduction suites keyed A1..A10, and
// parameter sweeps. CSV output is byte-deterministic for a fixed
// (config, seed) unless timing capture is requested.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "persim/estimate.hpp"
#include "persim/kernels.hpp"

namespace persim {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kResultHeader =
    "experiment_id,abscissa,value,stderr,method,seed,wall_time_ms";

struct LadderSpec {
    enum class Type { n_ladder, T_ladder };
    Type type = Type::n_ladder;
    std::vector<double> values;
    double delta = 0.0;   // T-ladder grid spacing
    std::string corr_id;  // T-ladder correlation ("ou:alpha=1.0", ...)
};

struct ExperimentConfig {
    std::string experiment_id;
    std::string kernel_id;
    std::string weights_id;
    double r = 0.0;
    LadderSpec ladder;
    int64_t replications = 10000;
    uint64_t seed = 0;
    std::string method = "mc"; // mc | orthant-qmc | both
    std::string out_path;      // empty: <default dir>/<experiment_id>.csv
    int64_t qmc_budget = int64_t{1} << 16;
    bool timing = false; // measured wall_time_ms in the CSV (non-deterministic)

    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    std::string canonical_json() const;
    void validate() const;
};

struct ResultRow {
    std::string experiment_id;
    double abscissa = 0.0;
    double value = 0.0; // log_p, or a fitted exponent for sweep curves
    double stderr_value = 0.0;
    std::string method;
    uint64_t seed = 0;
    int64_t wall_time_ms = 0;

    std::string csv() const;
};

// Shared-path streaming MC: paths of length max(ns) are generated once per
// replication and hit flags recorded on every nested prefix; never
// materializes an R x n batch.
std::vector<LadderPoint> mc_ladder(const CorrelationKernel& kernel,
                                   const WeightSequence& weights,
                                   const std::vector<int64_t>& ns, double r, int64_t R,
                                   uint64_t seed);

// Orthant evaluations of a stationary grid at horizons Ts (m = T/delta).
std::vector<LadderPoint> grid_ladder(const std::function<double(double)>& corr,
                                     const std::vector<double>& Ts, double delta,
                                     double r, int64_t budget, uint64_t seed);

// Stationary-grid correlation ids: "ou:alpha=1.0", "powerlaw:gamma=0.5",
// "cph:p=0.5,H=0.6", "dalpha:alpha=0.5,kernel=delta".
std::function<double(double)> parse_grid_corr(const std::string& id);

// Runs the configured ladder, writes the CSV (and a JSON sidecar with the
// config hash and versions) when an output path applies, returns the rows.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

struct CriterionResult {
    std::string id;
    std::string description;
    double measured = 0.0;
    std::string detail;
    bool pass = false;
};

struct SuiteResult {
    std::vector<CriterionResult> rows;
    bool all_pass() const;
};

// Predefined reproduction suites A1..A10 plus the property suite "props";
// "all" chains everything.
SuiteResult reproduce(const std::string& suite_id);

// One fitted exponent per grid value of p, H, or alpha; the base config
// supplies the T-ladder, spacing, budget, and the template correlation id.
std::vector<ResultRow> sweep(const std::string& parameter,
                             const std::vector<double>& grid,
                             const ExperimentConfig& base);

// $PERSIM_OUT_DIR when set, else "."
std::string default_output_dir();

void write_result_csv(const std::vector<ResultRow>& rows, const std::string& path);
void write_sidecar(const ExperimentConfig& config, int64_t total_ms,
                   const std::string& csv_path);

} // namespace persim
