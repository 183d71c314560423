#include "persim/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <omp.h>

#include "persim/fft.hpp"
#include "persim/reference.hpp"
#include "persim/rng.hpp"
#include "persim/simulate.hpp"
#include "persim/special.hpp"

namespace persim {

namespace {

using nlohmann::ordered_json;

int64_t now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

uint64_t fnv1a64(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    if (experiment_id.empty())
        throw std::invalid_argument("config: experiment_id must not be empty");
    if (ladder.values.empty())
        throw std::invalid_argument("config: ladder.values must not be empty");
    for (size_t i = 1; i < ladder.values.size(); ++i)
        if (!(ladder.values[i] > ladder.values[i - 1]))
            throw std::invalid_argument("config: ladder must be strictly increasing");
    if (method != "mc" && method != "orthant-qmc" && method != "both")
        throw std::invalid_argument("config: method must be mc, orthant-qmc, or both");
    if (ladder.type == LadderSpec::Type::T_ladder) {
        if (!(ladder.delta > 0.0))
            throw std::invalid_argument("config: delta must be > 0 for a T ladder");
        if (ladder.corr_id.empty())
            throw std::invalid_argument("config: corr id required for a T ladder");
        parse_grid_corr(ladder.corr_id);
    } else {
        CorrelationKernel::parse(kernel_id);
        WeightSequence::parse(weights_id);
        for (double v : ladder.values)
            if (v < 1.0 || v != std::floor(v))
                throw std::invalid_argument("config: n ladder values must be integers >= 1");
    }
    if ((method == "mc" || method == "both") && replications < 1000)
        throw std::invalid_argument("config: MC needs replications >= 1000");
    if (qmc_budget < 1024) throw std::invalid_argument("config: qmc_budget too small");
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    ordered_json j = ordered_json::parse(text); // parse errors carry positions
    ExperimentConfig cfg;
    try {
        cfg.experiment_id = j.at("experiment_id").get<std::string>();
        const auto& l = j.at("ladder");
        const std::string type = l.at("type").get<std::string>();
        if (type == "n") {
            cfg.ladder.type = LadderSpec::Type::n_ladder;
            cfg.kernel_id = j.at("kernel").get<std::string>();
            cfg.weights_id = j.at("weights").get<std::string>();
        } else if (type == "T") {
            cfg.ladder.type = LadderSpec::Type::T_ladder;
            cfg.ladder.delta = l.at("delta").get<double>();
            cfg.ladder.corr_id = l.at("corr").get<std::string>();
        } else {
            throw std::invalid_argument("config: ladder.type must be \"n\" or \"T\"");
        }
        cfg.ladder.values = l.at("values").get<std::vector<double>>();
        cfg.r = j.value("r", 0.0);
        cfg.replications = j.value("replications", int64_t{10000});
        cfg.seed = j.value("seed", uint64_t{0});
        cfg.method = j.value("method", std::string("mc"));
        cfg.out_path = j.value("out", std::string());
        cfg.qmc_budget = j.value("qmc_budget", int64_t{1} << 16);
        cfg.timing = j.value("timing", false);
    } catch (const ordered_json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

std::string ExperimentConfig::canonical_json() const {
    ordered_json j;
    j["experiment_id"] = experiment_id;
    if (ladder.type == LadderSpec::Type::n_ladder) {
        j["kernel"] = kernel_id;
        j["weights"] = weights_id;
        j["ladder"] = {{"type", "n"}, {"values", ladder.values}};
    } else {
        j["ladder"] = {{"type", "T"},
                       {"values", ladder.values},
                       {"delta", ladder.delta},
                       {"corr", ladder.corr_id}};
    }
    j["r"] = r;
    j["replications"] = replications;
    j["seed"] = seed;
    j["method"] = method;
    j["qmc_budget"] = qmc_budget;
    return j.dump();
}

std::string ResultRow::csv() const {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g,%s,%llu,%lld",
                  experiment_id.c_str(), abscissa, value, stderr_value, method.c_str(),
                  static_cast<unsigned long long>(seed),
                  static_cast<long long>(wall_time_ms));
    return buf;
}

// ---------------------------------------------------------------- ladders

std::vector<LadderPoint> mc_ladder(const CorrelationKernel& kernel,
                                   const WeightSequence& weights,
                                   const std::vector<int64_t>& ns, double r, int64_t R,
                                   uint64_t seed) {
    if (ns.empty()) throw std::invalid_argument("mc_ladder: empty ladder");
    for (size_t i = 0; i < ns.size(); ++i)
        if (ns[i] < 1 || (i > 0 && ns[i] <= ns[i - 1]))
            throw std::invalid_argument("mc_ladder: ladder must be strictly increasing");
    if (R < 1) throw std::invalid_argument("mc_ladder: R must be >= 1");

    const int64_t n_max = ns.back();
    const size_t J = ns.size();
    std::vector<double> sig(static_cast<size_t>(n_max));
    for (int64_t i = 0; i < n_max; ++i) sig[i] = weights.sigma(i + 1);

    const SpectralEmbedding emb = circulant_embed(kernel, n_max);
    std::vector<int64_t> hits(J, 0);

    if (emb.white) {
        // lazy generation with early exit once the level is crossed
#pragma omp parallel
        {
            std::vector<int64_t> local(J, 0);
#pragma omp for schedule(static)
            for (int64_t rep = 0; rep < R; ++rep) {
                CounterRng rng(seed, static_cast<uint64_t>(rep));
                double run = 0.0;
                size_t j = 0;
                for (int64_t i = 0; i < n_max && j < J; ++i) {
                    run += sig[i] * rng.normal_at(static_cast<uint64_t>(i));
                    if (run >= r) break;
                    if (i + 1 == ns[j]) ++local[j], ++j;
                }
            }
#pragma omp critical
            for (size_t j = 0; j < J; ++j) hits[j] += local[j];
        }
    } else {
        const int64_t ext = emb.extended_size();
        const int64_t pairs = (R + 1) / 2;
#pragma omp parallel
        {
            std::vector<int64_t> local(J, 0);
            std::vector<std::complex<double>> g(ext);
            auto record = [&](auto&& value_at) {
                double run = 0.0;
                size_t j = 0;
                for (int64_t i = 0; i < n_max && j < J; ++i) {
                    run += sig[i] * value_at(i);
                    if (run >= r) break;
                    if (i + 1 == ns[j]) ++local[j], ++j;
                }
            };
#pragma omp for schedule(static)
            for (int64_t q = 0; q < pairs; ++q) {
                CounterRng rng(seed, static_cast<uint64_t>(q));
                for (int64_t k = 0; k < ext; ++k) {
                    const double amp =
                        std::sqrt(emb.eigenvalues[k] / static_cast<double>(ext));
                    g[k] = {amp * rng.normal_at(2 * k), amp * rng.normal_at(2 * k + 1)};
                }
                fft::backward(g);
                record([&](int64_t i) { return g[i].real(); });
                if (2 * q + 1 < R) record([&](int64_t i) { return g[i].imag(); });
            }
#pragma omp critical
            for (size_t j = 0; j < J; ++j) hits[j] += local[j];
        }
    }

    std::vector<LadderPoint> out(J);
    for (size_t j = 0; j < J; ++j) {
        out[j].abscissa = static_cast<double>(ns[j]);
        out[j].estimate = estimate_from_hits(hits[j], R);
    }
    return out;
}

std::vector<LadderPoint> grid_ladder(const std::function<double(double)>& corr,
                                     const std::vector<double>& Ts, double delta,
                                     double r, int64_t budget, uint64_t seed) {
    std::vector<LadderPoint> out;
    out.reserve(Ts.size());
    for (size_t k = 0; k < Ts.size(); ++k) {
        const int64_t m = std::llround(Ts[k] / delta);
        if (m < 1) throw std::invalid_argument("grid_ladder: horizon below grid spacing");
        GramMatrix gram = gram_stationary(corr, delta, m, "grid");
        out.push_back({Ts[k], orthant_qmc(gram, r, budget, seed + k)});
    }
    return out;
}

std::function<double(double)> parse_grid_corr(const std::string& id) {
    const auto colon = id.find(':');
    const std::string family = id.substr(0, colon);
    const std::string body = (colon == std::string::npos) ? "" : id.substr(colon + 1);
    auto param = [&](const std::string& key) {
        const auto pos = body.find(key + "=");
        if (pos == std::string::npos)
            throw std::invalid_argument("grid corr: missing '" + key + "' in " + id);
        return std::strtod(body.c_str() + pos + key.size() + 1, nullptr);
    };
    if (family == "ou") {
        const double alpha = param("alpha");
        if (!(alpha > 0.0)) throw std::invalid_argument("grid corr: alpha must be > 0");
        return [alpha](double t) { return std::exp(-alpha * t); };
    }
    if (family == "powerlaw") {
        const double gamma = param("gamma");
        if (!(gamma > 0.0)) throw std::invalid_argument("grid corr: gamma must be > 0");
        return [gamma](double t) { return std::pow(1.0 + t, -gamma); };
    }
    if (family == "cph") {
        PHParams params{param("p"), param("H")};
        auto ev = std::make_shared<CphEvaluator>(params);
        return [ev](double t) { return (*ev)(t); };
    }
    if (family == "dalpha") {
        const double alpha = param("alpha");
        const auto kpos = body.find("kernel=");
        if (kpos == std::string::npos)
            throw std::invalid_argument("grid corr: dalpha needs kernel=");
        std::string kname = body.substr(kpos + 7);
        if (auto comma = kname.find(','); comma != std::string::npos) kname.resize(comma);
        CorrelationKernel kernel = [&] {
            if (kname == "delta") return CorrelationKernel::kronecker_delta();
            if (kname == "exp") return CorrelationKernel::exponential(param("lambda"));
            if (kname == "polysum")
                return CorrelationKernel::polynomial_summable(param("beta"));
            throw std::invalid_argument("grid corr: unsupported dalpha kernel " + kname);
        }();
        // integer-time correlation, evaluated at the nearest lag
        return [alpha, kernel](double t) {
            return d_alpha_rho(alpha, kernel, std::llround(t));
        };
    }
    throw std::invalid_argument("grid corr: unknown id " + id);
}

// ---------------------------------------------------------------- runner

std::string default_output_dir() {
    if (const char* env = std::getenv("PERSIM_OUT_DIR"); env && *env) return env;
    return ".";
}

void write_result_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary); // fixed newline bytes
    if (!out) throw std::runtime_error("cannot open output CSV " + path);
    out << kResultHeader << "\n";
    for (const auto& row : rows) out << row.csv() << "\n";
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_sidecar(const ExperimentConfig& config, int64_t total_ms,
                   const std::string& csv_path) {
    ordered_json j;
    char hash[32];
    std::snprintf(hash, sizeof(hash), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(config.canonical_json())));
    j["config_hash"] = hash;
    j["version"] = kVersion;
    j["csv"] = csv_path;
    j["total_wall_ms"] = total_ms;
    j["generated_at_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count();
    std::ofstream out(csv_path + ".meta.json");
    out << j.dump(2) << "\n";
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const int64_t t_start = now_ms();
    std::vector<ResultRow> rows;

    auto push = [&](double abscissa, const ProbabilityEstimate& est, int64_t ms) {
        ResultRow row;
        row.experiment_id = config.experiment_id;
        row.abscissa = abscissa;
        row.value = est.log_p;
        row.stderr_value = est.stderr_log;
        row.method = method_name(est.method);
        row.seed = config.seed;
        row.wall_time_ms = config.timing ? ms : 0;
        rows.push_back(std::move(row));
    };

    if (config.ladder.type == LadderSpec::Type::n_ladder) {
        const auto kernel = CorrelationKernel::parse(config.kernel_id);
        const auto weights = WeightSequence::parse(config.weights_id);
        std::vector<int64_t> ns(config.ladder.values.size());
        std::transform(config.ladder.values.begin(), config.ladder.values.end(),
                       ns.begin(), [](double v) { return static_cast<int64_t>(v); });
        if (config.method == "mc" || config.method == "both") {
            const int64_t t0 = now_ms();
            auto pts = mc_ladder(kernel, weights, ns, config.r, config.replications,
                                 config.seed);
            const int64_t ms = (now_ms() - t0) / static_cast<int64_t>(pts.size());
            for (const auto& pt : pts) push(pt.abscissa, pt.estimate, ms);
        }
        if (config.method == "orthant-qmc" || config.method == "both") {
            for (int64_t n : ns) {
                const int64_t t0 = now_ms();
                auto gram = gram_S(kernel, weights, n);
                auto est = orthant_qmc(gram, config.r, config.qmc_budget, config.seed);
                push(static_cast<double>(n), est, now_ms() - t0);
            }
        }
    } else {
        auto corr = parse_grid_corr(config.ladder.corr_id);
        for (size_t k = 0; k < config.ladder.values.size(); ++k) {
            const double T = config.ladder.values[k];
            const int64_t t0 = now_ms();
            const int64_t m = std::llround(T / config.ladder.delta);
            GramMatrix gram = gram_stationary(corr, config.ladder.delta, m, config.ladder.corr_id);
            auto est = orthant_qmc(gram, config.r, config.qmc_budget, config.seed + k);
            push(T, est, now_ms() - t0);
        }
    }

    std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return a.abscissa < b.abscissa || (a.abscissa == b.abscissa && a.method < b.method);
    });

    std::string path = config.out_path;
    if (path.empty()) path = config.experiment_id + ".csv";
    if (!std::filesystem::path(path).is_absolute())
        path = (std::filesystem::path(default_output_dir()) / path).string();
    write_result_csv(rows, path);
    write_sidecar(config, now_ms() - t_start, path);
    return rows;
}

std::vector<ResultRow> sweep(const std::string& parameter,
                             const std::vector<double>& grid,
                             const ExperimentConfig& base) {
    if (base.ladder.type != LadderSpec::Type::T_ladder)
        throw std::invalid_argument("sweep: base config must define a T ladder");
    std::vector<ResultRow> rows;
    for (size_t k = 0; k < grid.size(); ++k) {
        const double v = grid[k];
        std::string corr_id;
        if (parameter == "p" || parameter == "H") {
            // patch the swept key into the cph template
            const std::string& tpl = base.ladder.corr_id;
            auto value_of = [&](const std::string& key) {
                const auto pos = tpl.find(key + "=");
                if (pos == std::string::npos)
                    throw std::invalid_argument("sweep: base corr must be cph:p=..,H=..");
                return std::strtod(tpl.c_str() + pos + key.size() + 1, nullptr);
            };
            const double p = parameter == "p" ? v : value_of("p");
            const double H = parameter == "H" ? v : value_of("H");
            PHParams params{p, H};
            params.validate();
            corr_id = "cph:p=" + format_double(p) + ",H=" + format_double(H);
        } else if (parameter == "alpha") {
            if (!(v > 0.0)) throw std::invalid_argument("sweep: alpha must be > 0");
            corr_id = "ou:alpha=" + format_double(v);
        } else {
            throw std::invalid_argument("sweep: parameter must be p, H, or alpha");
        }
        auto pts = grid_ladder(parse_grid_corr(corr_id), base.ladder.values,
                               base.ladder.delta, base.r, base.qmc_budget,
                               base.seed + 7919 * k);
        auto fit = exponent_fit_linear(pts);
        ResultRow row;
        row.experiment_id = base.experiment_id;
        row.abscissa = v;
        row.value = fit.fit.exponent;
        row.stderr_value = (fit.fit.ci95.second - fit.fit.ci95.first) / (2.0 * 1.96);
        row.method = "orthant-qmc";
        row.seed = base.seed;
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------- suites

namespace {

void add_criterion(SuiteResult& suite, const std::string& id, const std::string& desc,
                   double measured, bool pass, const std::string& detail) {
    suite.rows.push_back({id, desc, measured, detail, pass});
}

std::vector<int64_t> pow2_ladder(int lo, int hi) {
    std::vector<int64_t> out;
    for (int e = lo; e <= hi; ++e) out.push_back(int64_t{1} << e);
    return out;
}

GramMatrix random_nonneg_gram(int n, uint64_t seed) {
    CounterRng rng(seed, 0);
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            B(i, j) = std::fabs(rng.normal_at(static_cast<uint64_t>(i * n + j)));
    Eigen::MatrixXd S = B * B.transpose();
    Eigen::VectorXd d = S.diagonal().cwiseSqrt();
    GramMatrix gram;
    gram.m = d.cwiseInverse().asDiagonal() * S * d.cwiseInverse().asDiagonal();
    gram.m = 0.5 * (gram.m + gram.m.transpose());
    gram.kind = GramKind::weighted_sum;
    gram.metadata = "random";
    return gram;
}

SuiteResult suite_A1() {
    SuiteResult s;
    auto pts = mc_ladder(CorrelationKernel::kronecker_delta(),
                         WeightSequence::polynomial(0.0), pow2_ladder(4, 12), 0.0,
                         1000000, 9101);
    auto fit = exponent_fit_loglog(pts, WeightSequence::polynomial(0.0), Regressor::log_n);
    add_criterion(s, "A1", "iid calibrator: log-log slope vs log n", fit.exponent,
                  std::fabs(fit.exponent + 0.5) <= 0.05, "expected -0.50 +- 0.05");
    return s;
}

SuiteResult suite_A2() {
    SuiteResult s;
    auto kernel = CorrelationKernel::polynomial_summable(2.0);
    auto weights = WeightSequence::polynomial(1.0);
    auto pts = mc_ladder(kernel, weights, pow2_ladder(4, 12), 0.0, 1000000, 9102);
    auto fit_s = exponent_fit_loglog(pts, weights, Regressor::log_s);
    add_criterion(s, "A2", "universal slope vs log s(n)", fit_s.exponent,
                  std::fabs(fit_s.exponent + 1.0) <= 0.15, "expected -1.0 +- 0.15");
    auto fit_n = exponent_fit_loglog(pts, weights, Regressor::log_n);
    add_criterion(s, "A2", "equivalent slope vs log n", fit_n.exponent,
                  std::fabs(fit_n.exponent + 1.5) <= 0.2, "expected -1.5 +- 0.2");
    return s;
}

SuiteResult suite_A3() {
    SuiteResult s;
    auto pts = mc_ladder(CorrelationKernel::fgn(0.75), WeightSequence::polynomial(0.0),
                         pow2_ladder(4, 12), 0.0, 1000000, 9103);
    auto fit = exponent_fit_loglog(pts, WeightSequence::polynomial(0.0), Regressor::log_n);
    add_criterion(s, "A3", "fgn H=0.75: slope vs log n = -(1-H)", fit.exponent,
                  std::fabs(fit.exponent + 0.25) <= 0.05, "expected -0.25 +- 0.05");
    return s;
}

SuiteResult suite_A4() {
    SuiteResult s;
    const double ps[7] = {-0.6, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0};
    double worst = 0.0;
    for (double p : ps) {
        for (int k = 0; k < 7; ++k) {
            const double H = 0.55 + 0.4 * k / 6.0;
            if (p + H <= 0.0) continue;
            PHParams params{p, H};
            const double sel = selberg_f11(params);
            worst = std::max(worst, std::fabs(f_ph(params, 1.0, 1.0).value - sel) / sel);
        }
    }
    add_criterion(s, "A4", "Selberg vs quadrature, worst relative deviation on 7x7 grid",
                  worst, worst <= 1e-6, "tolerance 1e-6");
    return s;
}

SuiteResult suite_A5() {
    SuiteResult s;
    const PHParams pairs[3] = {{0.0, 0.75}, {0.5, 0.7}, {1.0, 0.55}};
    for (const auto& params : pairs) {
        CphEvaluator ev(params);
        double worst = 1.0;
        for (double tau = 0.1; tau <= 5.0 + 1e-9; tau += 0.1) {
            const double v = ev(tau);
            const double N = std::min(2.0, std::exp(tau));
            auto [lo, hi] = c_ph_bounds(params, tau, N);
            const double trivial = std::exp(-(params.p + params.H) * tau);
            worst = std::min({worst, v - lo, hi - v, v - trivial});
        }
        char desc[96];
        std::snprintf(desc, sizeof(desc),
                      "bracket and lower bound hold (p=%g, H=%g), min margin", params.p,
                      params.H);
        add_criterion(s, "A5", desc, worst, worst >= -1e-8, "slack 1e-8");
    }
    return s;
}

SuiteResult suite_A6() {
    SuiteResult s;
    const std::vector<double> Ts{5.0, 10.0, 15.0, 20.0, 25.0};
    double dev_low = 0.0, dev_high = 0.0;
    for (double H : {0.55, 0.60}) {
        auto corr = parse_grid_corr("cph:p=0.5,H=" + format_double(H));
        auto pts = grid_ladder(corr, Ts, 0.05, 0.0, int64_t{1} << 17, 9106);
        auto fit = exponent_fit_linear(pts);
        const double dev = std::fabs(fit.fit.exponent - 1.0);
        (H == 0.55 ? dev_low : dev_high) = dev;
        char desc[96];
        std::snprintf(desc, sizeof(desc), "theta estimate at p=0.5, H=%g vs p+1/2", H);
        add_criterion(s, "A6", desc, fit.fit.exponent, dev <= 0.2, "within 20% of 1.0");
    }
    add_criterion(s, "A6", "estimate moves toward p+1/2 as H decreases",
                  dev_low - dev_high, dev_low <= dev_high + 1e-12,
                  "|theta(0.55)-1| <= |theta(0.60)-1|");
    return s;
}

SuiteResult suite_A7() {
    SuiteResult s;
    auto emb = circulant_embed(CorrelationKernel::kronecker_delta(), 2);
    auto xi = sample_stationary(emb, 1000000, 2, 9107);
    auto paths = weighted_partial_sums(xi, WeightSequence::polynomial(0.0));
    auto mc = persistence_mc(paths, 0.0);
    const double p_mc = std::exp(mc.log_p);
    const double se_p = p_mc * mc.stderr_log;
    add_criterion(s, "A7", "bivariate q_2 by MC", p_mc,
                  std::fabs(p_mc - 0.375) <= 4.0 * se_p, "3/8 within 4 stderr");

    GramMatrix gram = gram_S(CorrelationKernel::kronecker_delta(),
                             WeightSequence::polynomial(0.0), 2);
    OrthantOptions tight;
    tight.rel_target = 2e-5;
    auto qmc = orthant_qmc(gram, 0.0, int64_t{1} << 20, 9207, tight);
    const double p_qmc = std::exp(qmc.log_p);
    add_criterion(s, "A7", "bivariate q_2 by orthant-qmc", p_qmc,
                  std::fabs(p_qmc - 0.375) <= 1e-4, "3/8 within 1e-4");
    return s;
}

SuiteResult suite_A8() {
    SuiteResult s;
    for (const auto& kernel :
         {CorrelationKernel::fgn(0.75), CorrelationKernel::exponential(1.0)}) {
        auto emb = circulant_embed(kernel, 64);
        auto paths = sample_stationary(emb, 200000, 64, 9108);
        double worst = 0.0;
        for (int64_t lag = 0; lag <= 10; ++lag) {
            double sum = 0.0, sum2 = 0.0;
            for (int64_t rep = 0; rep < paths.R; ++rep) {
                auto row = paths.row(rep);
                double m = 0.0;
                for (int64_t i = 0; i + lag < paths.n; ++i) m += row[i] * row[i + lag];
                m /= static_cast<double>(paths.n - lag);
                sum += m;
                sum2 += m * m;
            }
            const double mean = sum / paths.R;
            const double se =
                std::sqrt((sum2 / paths.R - mean * mean) / (paths.R - 1.0));
            worst = std::max(worst, std::fabs(mean - kernel.rho(lag)) / se);
        }
        add_criterion(s, "A8", "max |rho_hat - rho| over lags 0..10, in stderr units (" +
                          kernel.id() + ")",
                      worst, worst <= 5.0, "within 5 stderr");
    }
    return s;
}

SuiteResult suite_A9() {
    SuiteResult s;
    auto pts = grid_ladder(parse_grid_corr("ou:alpha=1.0"), {5.0, 10.0, 20.0, 30.0},
                           0.01, 0.0, int64_t{1} << 17, 9109);
    auto fit = exponent_fit_linear(pts);
    add_criterion(s, "A9", "OU grid persistence exponent", fit.fit.exponent,
                  std::fabs(fit.fit.exponent - 1.0) <= 0.10, "expected 1.00 +- 0.10");
    return s;
}

SuiteResult suite_A10() {
    SuiteResult s;
    auto power = grid_ladder(parse_grid_corr("powerlaw:gamma=0.5"), {5.0, 40.0}, 0.1,
                             0.0, int64_t{1} << 16, 9110);
    const double start = -power.front().estimate.log_p / 5.0;
    const double end = -power.back().estimate.log_p / 40.0;
    add_criterion(s, "A10", "nonintegrable tail: a(T)/T decay from T=5 to T=40",
                  1.0 - end / start, end <= 0.7 * start, "decrease >= 30%");

    auto ou = grid_ladder(parse_grid_corr("ou:alpha=1.0"), {20.0, 40.0}, 0.01, 0.0,
                          int64_t{1} << 17, 9210);
    const double r20 = -ou.front().estimate.log_p / 20.0;
    const double r40 = -ou.back().estimate.log_p / 40.0;
    add_criterion(s, "A10", "integrable tail: a(T)/T stable from T=20 to T=40",
                  std::fabs(r40 / r20 - 1.0), std::fabs(r40 / r20 - 1.0) <= 0.10,
                  "within 10%");
    return s;
}

SuiteResult suite_props() {
    SuiteResult s;

    // scaling and symmetry of f_{p,H}
    {
        CounterRng rng(4242, 0);
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const double p = -0.4 + 2.0 * rng.uniform_at(4 * t);
            const double H = 0.55 + 0.4 * rng.uniform_at(4 * t + 1);
            if (p + H <= 0.05) continue;
            PHParams params{p, H};
            const double a = 0.5 + 2.0 * rng.uniform_at(4 * t + 2);
            const double b = 0.5 + 2.0 * rng.uniform_at(4 * t + 3);
            const double fab = f_ph(params, a, b).value;
            const double fba = f_ph(params, b, a).value;
            const double scaled = f_ph(params, 1.3 * a, 1.3 * b).value /
                                  std::pow(1.3, 2.0 * p + 2.0 * H);
            worst = std::max({worst, std::fabs(fab - fba) / fab,
                              std::fabs(scaled - fab) / fab});
        }
        add_criterion(s, "props", "f scaling/symmetry, worst relative deviation", worst,
                      worst <= 1e-6, "tolerance 1e-6");
    }

    // Slepian block inequality on random nonnegative Gram matrices
    {
        bool all = true;
        double worst = std::numeric_limits<double>::infinity();
        for (int t = 0; t < 10; ++t) {
            const int n = 4 + (t % 5);
            auto gram = random_nonneg_gram(n, 8800 + t);
            auto rep = slepian_block_check(gram, 0.0, n / 2, 8900 + t);
            all = all && rep.holds;
            worst = std::min(worst, rep.margin);
        }
        add_criterion(s, "props", "Slepian block inequality on 10 random matrices, min margin",
                      worst, all, "margin >= -4 combined stderr");
    }

    // Fekete monotonicity ladder on an OU grid
    {
        auto corr = parse_grid_corr("ou:alpha=1.0");
        bool ok = true;
        double prev_ratio = 0.0, prev_se = 0.0;
        bool first = true;
        for (double T : {5.0, 10.0, 20.0, 40.0}) {
            const int64_t m = std::llround(T / 0.05);
            auto est = orthant_qmc(gram_stationary(corr, 0.05, m, "ou"), 0.0,
                                   int64_t{1} << 16, 8601);
            const double ratio = -est.log_p / T;
            const double se = est.stderr_log / T;
            if (!first) ok = ok && ratio <= prev_ratio + 3.0 * (se + prev_se);
            prev_ratio = ratio;
            prev_se = se;
            first = false;
        }
        add_criterion(s, "props", "Fekete ladder monotone within noise", prev_ratio, ok,
                      "a(2T)/2T <= a(T)/T + 3 stderr");
    }

    // MC / orthant cross-agreement
    {
        bool all = true;
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const int n = 2 + (t % 7);
            auto gram = random_nonneg_gram(n, 8200 + t);
            auto qmc = orthant_qmc(gram, 0.0, int64_t{1} << 16, 8300 + t);
            auto mc = persistence_mc(cholesky_sample(gram, 1000000, 8400 + t), 0.0);
            const double combined =
                std::hypot(mc.stderr_log, std::max(qmc.stderr_log, 1e-4));
            const double dev = std::fabs(mc.log_p - qmc.log_p) / combined;
            worst = std::max(worst, dev);
            all = all && dev <= 4.0;
        }
        add_criterion(s, "props", "MC vs orthant agreement, worst deviation (stderr units)",
                      worst, all, "within 4 combined stderr");
    }

    // bit reproducibility under thread-count variation
    {
        auto emb = circulant_embed(CorrelationKernel::fgn(0.75), 128);
        const int saved = omp_get_max_threads();
        omp_set_num_threads(1);
        auto one = sample_stationary(emb, 65, 128, 8501);
        auto ladder_one = mc_ladder(CorrelationKernel::fgn(0.75),
                                    WeightSequence::polynomial(0.0), {16, 64}, 0.0,
                                    20000, 8502);
        omp_set_num_threads(2);
        auto two = sample_stationary(emb, 65, 128, 8501);
        auto ladder_two = mc_ladder(CorrelationKernel::fgn(0.75),
                                    WeightSequence::polynomial(0.0), {16, 64}, 0.0,
                                    20000, 8502);
        omp_set_num_threads(saved);
        const bool same_paths =
            std::memcmp(one.values.data(), two.values.data(),
                        one.values.size() * sizeof(double)) == 0;
        const bool same_hits =
            ladder_one[0].estimate.hits == ladder_two[0].estimate.hits &&
            ladder_one[1].estimate.hits == ladder_two[1].estimate.hits;
        add_criterion(s, "props", "bit-identical results for 1 vs 2 threads",
                      same_paths && same_hits ? 1.0 : 0.0, same_paths && same_hits,
                      "paths and ladder hits");
    }

    return s;
}

} // namespace

bool SuiteResult::all_pass() const {
    for (const auto& row : rows)
        if (!row.pass) return false;
    return true;
}

SuiteResult reproduce(const std::string& suite_id) {
    if (suite_id == "A1") return suite_A1();
    if (suite_id == "A2") return suite_A2();
    if (suite_id == "A3") return suite_A3();
    if (suite_id == "A4") return suite_A4();
    if (suite_id == "A5") return suite_A5();
    if (suite_id == "A6") return suite_A6();
    if (suite_id == "A7") return suite_A7();
    if (suite_id == "A8") return suite_A8();
    if (suite_id == "A9") return suite_A9();
    if (suite_id == "A10") return suite_A10();
    if (suite_id == "props") return suite_props();
    if (suite_id == "all") {
        SuiteResult all;
        for (const char* id :
             {"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "props"}) {
            SuiteResult one = reproduce(id);
            all.rows.insert(all.rows.end(), one.rows.begin(), one.rows.end());
        }
        return all;
    }
    throw std::invalid_argument("reproduce: unknown suite id " + suite_id);
}

} // namespace persim
