// Correlation-kernel and weight-sequence families, their scale function s
// and its inverse w, and summability classification.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace persim {

enum class KernelFamily {
    kronecker_delta,
    exponential,
    polynomial_summable,
    fgn,
    user_table,
};

enum class TailKind { summable, nonsummable };

struct TailClass {
    TailKind kind = TailKind::summable;
    double H = 0.0;      // nonsummable: rho(i) ~ kappa * i^(2H-2)
    double kappa = 0.0;
    bool boundary_warning = false; // fitted slope within 0.05 of -1
};

/// Stationary nonnegative correlation rho(lag), rho(0) = 1.
class CorrelationKernel {
public:
    static CorrelationKernel kronecker_delta();
    static CorrelationKernel exponential(double lambda);
    static CorrelationKernel polynomial_summable(double beta);
    static CorrelationKernel fgn(double H);
    static CorrelationKernel user_table(std::vector<double> rho,
                                        std::optional<TailClass> declared = std::nullopt);

    // String identifiers: "delta", "exp:lambda=1.0", "polysum:beta=2.0",
    // "fgn:H=0.75".
    static CorrelationKernel parse(const std::string& id);

    double rho(int64_t lag) const;
    KernelFamily family() const { return family_; }
    std::string id() const;
    const std::vector<double>& table() const { return table_; }

    TailClass declared_tail() const;
    bool has_declared_tail() const { return declared_.has_value(); }
    // Upper bound on sum_{l > lag} rho(l); +inf for nonsummable tails.
    double tail_sum_bound(int64_t lag) const;

private:
    CorrelationKernel(KernelFamily family, double a, double b);
    KernelFamily family_;
    double par_a_ = 0.0;
    double par_b_ = 0.0;
    std::vector<double> table_;
    std::vector<double> table_suffix_; // suffix sums for tail bounds
    std::optional<TailClass> declared_;
};

TailClass classify_summability(const CorrelationKernel& kernel);

enum class WeightFamily {
    polynomial,
    log_scale,
    stretched_exponential,
    exponential,
    user_table,
};

/// Positive weights sigma(i), i >= 1, with the cumulative scale
/// s(t)^2 = int_0^t sigma(ceil(x))^2 dx and its inverse w.
class WeightSequence {
public:
    static WeightSequence polynomial(double p);
    static WeightSequence log_scale();
    static WeightSequence stretched_exponential(double gamma, double p);
    static WeightSequence exponential(double alpha);
    static WeightSequence user_table(std::vector<double> sigma);

    // "poly:p=1.0", "logscale", "stretchexp:gamma=0.5,p=0.5",
    // "exp-weight:alpha=0.2".
    static WeightSequence parse(const std::string& id);

    double sigma(int64_t i) const;
    double s_squared(double t) const;
    double s(double t) const;
    // Inverse of s; exact cell-wise solve on the piecewise-quadratic s^2.
    double w(double u) const;

    WeightFamily family() const { return family_; }
    std::string id() const;
    // Exponent p for the polynomial family, nullopt otherwise.
    std::optional<double> polynomial_p() const;
    // True when sum sigma(i)^2 converges (s stays bounded).
    bool s_bounded() const;

private:
    WeightSequence(WeightFamily family, double a, double b);
    // Ensures the prefix cache covers indices <= upto; returns the cache.
    const std::vector<double>& prefix(size_t upto) const;

    WeightFamily family_;
    double par_a_ = 0.0;
    double par_b_ = 0.0;
    std::vector<double> table_;
    struct Cache;
    std::shared_ptr<Cache> cache_;
};

// Empirical check of the weight regularity conditions: the smallest C with
// sigma(m)/s(m) <= C * sigma(n)/s(n) for all n <= m <= N, and the worst
// late-range deviation of sigma(n+1)/sigma(n) from 1.
struct WeightRegularity {
    double log_concave_C = 1.0;
    double sigma_ratio_dev = 0.0;
};
WeightRegularity check_weight_regularity(const WeightSequence& weights, int64_t N);

} // namespace persim
