#include "persim/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace persim {

namespace {

constexpr size_t kMaxScaleIndex = size_t{1} << 23; // desk-scale cap for s/w caches

double parse_param(const std::string& id, const std::string& body,
                   const std::string& key) {
    auto pos = body.find(key + "=");
    if (pos == std::string::npos)
        throw std::invalid_argument("missing parameter '" + key + "' in id: " + id);
    const char* start = body.c_str() + pos + key.size() + 1;
    char* end = nullptr;
    double value = std::strtod(start, &end);
    if (end == start)
        throw std::invalid_argument("bad numeric value for '" + key + "' in id: " + id);
    return value;
}

std::string format_param(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

// FGN second difference of x^{2H}: exact for small lags, even-order series
// for large ones where the direct form cancels.
double fgn_rho(double H, int64_t lag) {
    if (lag == 0) return 1.0;
    const double a = 2.0 * H;
    const double i = static_cast<double>(lag);
    if (lag < 64) {
        return 0.5 * (std::pow(i + 1.0, a) + std::pow(i - 1.0, a) - 2.0 * std::pow(i, a));
    }
    // rho(i) = sum_{m even >= 2} C(a,m) i^{a-m}
    double total = 0.0;
    double coeff = a * (a - 1.0) / 2.0; // C(a,2)
    double scale = std::pow(i, a - 2.0);
    const double inv2 = 1.0 / (i * i);
    for (int m = 2; m <= 10; m += 2) {
        total += coeff * scale;
        coeff *= (a - m) * (a - m - 1.0) / ((m + 1.0) * (m + 2.0));
        scale *= inv2;
    }
    return total;
}

} // namespace

CorrelationKernel::CorrelationKernel(KernelFamily family, double a, double b)
    : family_(family), par_a_(a), par_b_(b) {}

CorrelationKernel CorrelationKernel::kronecker_delta() {
    return CorrelationKernel(KernelFamily::kronecker_delta, 0.0, 0.0);
}

CorrelationKernel CorrelationKernel::exponential(double lambda) {
    if (!(lambda > 0.0))
        throw std::invalid_argument("exponential kernel needs lambda > 0");
    return CorrelationKernel(KernelFamily::exponential, lambda, 0.0);
}

CorrelationKernel CorrelationKernel::polynomial_summable(double beta) {
    if (!(beta > 1.0))
        throw std::invalid_argument("polynomial-summable kernel needs beta > 1");
    return CorrelationKernel(KernelFamily::polynomial_summable, beta, 0.0);
}

CorrelationKernel CorrelationKernel::fgn(double H) {
    if (!(H >= 0.5 && H < 1.0))
        throw std::invalid_argument("fgn kernel needs H in [0.5, 1)");
    return CorrelationKernel(KernelFamily::fgn, H, 0.0);
}

CorrelationKernel CorrelationKernel::user_table(std::vector<double> rho,
                                                std::optional<TailClass> declared) {
    if (rho.empty() || std::fabs(rho[0] - 1.0) > 1e-12)
        throw std::invalid_argument("user table must start with rho(0) = 1");
    for (double v : rho)
        if (!(v >= 0.0) || v > 1.0 + 1e-12)
            throw std::invalid_argument("user table entries must lie in [0,1]");
    CorrelationKernel k(KernelFamily::user_table, 0.0, 0.0);
    k.table_ = std::move(rho);
    k.table_suffix_.assign(k.table_.size() + 1, 0.0);
    for (size_t i = k.table_.size(); i-- > 0;)
        k.table_suffix_[i] = k.table_suffix_[i + 1] + k.table_[i];
    k.declared_ = declared;
    return k;
}

CorrelationKernel CorrelationKernel::parse(const std::string& id) {
    const auto colon = id.find(':');
    const std::string family = id.substr(0, colon);
    const std::string body = (colon == std::string::npos) ? "" : id.substr(colon + 1);
    if (family == "delta" || family == "kronecker-delta") return kronecker_delta();
    if (family == "exp") return exponential(parse_param(id, body, "lambda"));
    if (family == "polysum") return polynomial_summable(parse_param(id, body, "beta"));
    if (family == "fgn") return fgn(parse_param(id, body, "H"));
    throw std::invalid_argument("unknown kernel id: " + id);
}

double CorrelationKernel::rho(int64_t lag) const {
    if (lag < 0) throw std::invalid_argument("rho: negative lag");
    switch (family_) {
        case KernelFamily::kronecker_delta:
            return lag == 0 ? 1.0 : 0.0;
        case KernelFamily::exponential:
            return std::exp(-par_a_ * static_cast<double>(lag));
        case KernelFamily::polynomial_summable:
            return std::pow(1.0 + static_cast<double>(lag), -par_a_);
        case KernelFamily::fgn:
            return fgn_rho(par_a_, lag);
        case KernelFamily::user_table:
            return lag < static_cast<int64_t>(table_.size()) ? table_[lag] : 0.0;
    }
    throw std::logic_error("unknown kernel family");
}

std::string CorrelationKernel::id() const {
    switch (family_) {
        case KernelFamily::kronecker_delta: return "delta";
        case KernelFamily::exponential: return "exp:lambda=" + format_param(par_a_);
        case KernelFamily::polynomial_summable: return "polysum:beta=" + format_param(par_a_);
        case KernelFamily::fgn: return "fgn:H=" + format_param(par_a_);
        case KernelFamily::user_table: return "table:n=" + std::to_string(table_.size());
    }
    return "?";
}

TailClass CorrelationKernel::declared_tail() const {
    TailClass tc;
    switch (family_) {
        case KernelFamily::kronecker_delta:
        case KernelFamily::exponential:
        case KernelFamily::polynomial_summable:
            tc.kind = TailKind::summable;
            return tc;
        case KernelFamily::fgn:
            if (par_a_ > 0.5) {
                tc.kind = TailKind::nonsummable;
                tc.H = par_a_;
                tc.kappa = par_a_ * (2.0 * par_a_ - 1.0);
            }
            return tc;
        case KernelFamily::user_table:
            if (declared_) return *declared_;
            tc.kind = TailKind::summable; // finite table
            return tc;
    }
    return tc;
}

double CorrelationKernel::tail_sum_bound(int64_t lag) const {
    switch (family_) {
        case KernelFamily::kronecker_delta:
            return 0.0;
        case KernelFamily::exponential: {
            const double q = std::exp(-par_a_);
            return std::pow(q, static_cast<double>(lag + 1)) / (1.0 - q);
        }
        case KernelFamily::polynomial_summable:
            return std::pow(1.0 + static_cast<double>(lag), 1.0 - par_a_) / (par_a_ - 1.0);
        case KernelFamily::fgn:
            return par_a_ > 0.5 ? std::numeric_limits<double>::infinity() : 0.0;
        case KernelFamily::user_table:
            return lag + 1 < static_cast<int64_t>(table_suffix_.size())
                       ? table_suffix_[lag + 1]
                       : 0.0;
    }
    return std::numeric_limits<double>::infinity();
}

TailClass classify_summability(const CorrelationKernel& kernel) {
    // Declared families and explicitly tagged tables answer directly; only
    // untagged user tables need the log-log tail fit.
    if (kernel.family() != KernelFamily::user_table || kernel.has_declared_tail())
        return kernel.declared_tail();

    const auto& table = kernel.table();
    if (table.size() < 16)
        throw std::invalid_argument("classify_summability: user table too short to fit (< 16 lags)");
    // Fit log rho(i) against log i on the largest decade of available lags.
    const int64_t max_lag = static_cast<int64_t>(table.size()) - 1;
    const int64_t lo = std::max<int64_t>(1, max_lag / 10);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int64_t count = 0;
    for (int64_t i = lo; i <= max_lag; ++i) {
        if (!(table[i] > 0.0)) continue;
        const double x = std::log(static_cast<double>(i));
        const double y = std::log(table[i]);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++count;
    }
    if (count < 2)
        throw std::invalid_argument("classify_summability: table tail has no positive decade to fit");
    const double denom = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / count;

    TailClass tc;
    tc.boundary_warning = std::fabs(slope + 1.0) <= 0.05;
    if (slope < -1.0) {
        tc.kind = TailKind::summable;
    } else if (slope < 0.0) {
        tc.kind = TailKind::nonsummable;
        tc.H = 1.0 + slope / 2.0;
        tc.kappa = std::exp(intercept);
    } else {
        throw std::invalid_argument("classify_summability: fitted tail does not decay");
    }
    return tc;
}

// ---------------------------------------------------------------------------

struct WeightSequence::Cache {
    std::mutex mutex;
    std::vector<double> prefix; // prefix[k] = s(k)^2
};

WeightSequence::WeightSequence(WeightFamily family, double a, double b)
    : family_(family), par_a_(a), par_b_(b), cache_(std::make_shared<Cache>()) {
    cache_->prefix.push_back(0.0);
}

WeightSequence WeightSequence::polynomial(double p) {
    return WeightSequence(WeightFamily::polynomial, p, 0.0);
}

WeightSequence WeightSequence::log_scale() {
    return WeightSequence(WeightFamily::log_scale, 0.0, 0.0);
}

WeightSequence WeightSequence::stretched_exponential(double gamma, double p) {
    if (!(gamma > 0.0) || !(p > 0.0 && p < 1.0))
        throw std::invalid_argument("stretched-exponential weights need gamma > 0, p in (0,1)");
    return WeightSequence(WeightFamily::stretched_exponential, gamma, p);
}

WeightSequence WeightSequence::exponential(double alpha) {
    if (!(alpha > 0.0))
        throw std::invalid_argument("exponential weights need alpha > 0");
    return WeightSequence(WeightFamily::exponential, alpha, 0.0);
}

WeightSequence WeightSequence::user_table(std::vector<double> sigma) {
    for (double v : sigma)
        if (!(v > 0.0)) throw std::invalid_argument("weights must be positive");
    WeightSequence w(WeightFamily::user_table, 0.0, 0.0);
    w.table_ = std::move(sigma);
    return w;
}

WeightSequence WeightSequence::parse(const std::string& id) {
    const auto colon = id.find(':');
    const std::string family = id.substr(0, colon);
    const std::string body = (colon == std::string::npos) ? "" : id.substr(colon + 1);
    if (family == "poly") return polynomial(parse_param(id, body, "p"));
    if (family == "logscale" || family == "log-scale") return log_scale();
    if (family == "stretchexp")
        return stretched_exponential(parse_param(id, body, "gamma"), parse_param(id, body, "p"));
    if (family == "exp-weight") return exponential(parse_param(id, body, "alpha"));
    throw std::invalid_argument("unknown weights id: " + id);
}

double WeightSequence::sigma(int64_t i) const {
    if (i < 1) throw std::invalid_argument("sigma: index must be >= 1");
    const double x = static_cast<double>(i);
    switch (family_) {
        case WeightFamily::polynomial: return std::pow(x, par_a_);
        case WeightFamily::log_scale: return 1.0 / std::sqrt(x);
        case WeightFamily::stretched_exponential: return std::exp(par_a_ * std::pow(x, par_b_));
        case WeightFamily::exponential: return std::exp(par_a_ * x);
        case WeightFamily::user_table:
            if (i > static_cast<int64_t>(table_.size()))
                throw std::invalid_argument("sigma: index beyond user table");
            return table_[i - 1];
    }
    throw std::logic_error("unknown weight family");
}

std::string WeightSequence::id() const {
    switch (family_) {
        case WeightFamily::polynomial: return "poly:p=" + format_param(par_a_);
        case WeightFamily::log_scale: return "logscale";
        case WeightFamily::stretched_exponential:
            return "stretchexp:gamma=" + format_param(par_a_) + ",p=" + format_param(par_b_);
        case WeightFamily::exponential: return "exp-weight:alpha=" + format_param(par_a_);
        case WeightFamily::user_table: return "table:n=" + std::to_string(table_.size());
    }
    return "?";
}

std::optional<double> WeightSequence::polynomial_p() const {
    if (family_ == WeightFamily::polynomial) return par_a_;
    return std::nullopt;
}

bool WeightSequence::s_bounded() const {
    switch (family_) {
        case WeightFamily::polynomial: return par_a_ < -0.5;
        case WeightFamily::log_scale: return false;
        case WeightFamily::stretched_exponential: return false;
        case WeightFamily::exponential: return false;
        case WeightFamily::user_table: return true; // defined range only
    }
    return false;
}

const std::vector<double>& WeightSequence::prefix(size_t upto) const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    auto& p = cache_->prefix;
    if (p.size() > upto) return p;
    if (upto >= kMaxScaleIndex)
        throw std::runtime_error("scale function requested beyond desk-scale cap 2^23");
    p.reserve(upto + 1);
    while (p.size() <= upto) {
        const double sig = sigma(static_cast<int64_t>(p.size()));
        p.push_back(p.back() + sig * sig);
    }
    return p;
}

double WeightSequence::s_squared(double t) const {
    if (!(t >= 0.0)) throw std::invalid_argument("s: t must be >= 0");
    if (t == 0.0) return 0.0;
    const double fl = std::floor(t);
    const size_t k = static_cast<size_t>(fl);
    const double frac = t - fl;
    const auto& p = prefix(frac > 0.0 ? k + 1 : k);
    double value = p[k];
    if (frac > 0.0) {
        const double sig = sigma(static_cast<int64_t>(k) + 1);
        value += frac * sig * sig;
    }
    return value;
}

double WeightSequence::s(double t) const { return std::sqrt(s_squared(t)); }

double WeightSequence::w(double u) const {
    if (!(u >= 0.0)) throw std::invalid_argument("w: u must be >= 0");
    if (u == 0.0) return 0.0;
    const double target = u * u;

    // Grow the prefix cache until it covers the target, watching for a
    // bounded scale (sum sigma^2 < inf) where the inverse does not exist.
    size_t hi = 64;
    while (true) {
        const auto& p = prefix(hi);
        if (p.back() >= target) break;
        if (family_ == WeightFamily::user_table && hi >= table_.size())
            throw std::domain_error("w: u exceeds the scale of the weight table");
        if (s_bounded()) {
            // polynomial p < -1/2: bounded remainder sum_{i>K} i^{2p}
            const double expo = 2.0 * par_a_;
            const double tail = std::pow(static_cast<double>(hi), expo + 1.0) / (-expo - 1.0);
            if (p.back() + tail < target)
                throw std::domain_error("w: u exceeds sup s (square-summable weights)");
        }
        if (hi >= kMaxScaleIndex - 1)
            throw std::runtime_error("w: inverse beyond desk-scale cap 2^23");
        hi = std::min(hi * 2, kMaxScaleIndex - 1);
    }
    const auto& p = prefix(hi);
    // Largest k with p[k] <= target, then exact solve in the linear cell.
    const auto it = std::upper_bound(p.begin(), p.end(), target);
    const size_t k = static_cast<size_t>(it - p.begin()) - 1;
    if (p[k] == target) return static_cast<double>(k);
    const double sig = sigma(static_cast<int64_t>(k) + 1);
    return static_cast<double>(k) + (target - p[k]) / (sig * sig);
}

WeightRegularity check_weight_regularity(const WeightSequence& weights, int64_t N) {
    WeightRegularity reg;
    double min_ratio = std::numeric_limits<double>::infinity();
    for (int64_t n = 1; n <= N; ++n) {
        const double ratio = weights.sigma(n) / weights.s(static_cast<double>(n));
        if (ratio / min_ratio > reg.log_concave_C)
            reg.log_concave_C = ratio / min_ratio;
        min_ratio = std::min(min_ratio, ratio);
    }
    for (int64_t n = N / 2; n < N; ++n) {
        const double dev = std::fabs(weights.sigma(n + 1) / weights.sigma(n) - 1.0);
        reg.sigma_ratio_dev = std::max(reg.sigma_ratio_dev, dev);
    }
    return reg;
}

} // namespace persim
