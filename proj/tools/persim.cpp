// persim command line: sampling, special-function evaluation, persistence
// experiments, parameter sweeps, and the reproduction suites.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <omp.h>

#include "persim/covariance.hpp"
#include "persim/harness.hpp"
#include "persim/simulate.hpp"
#include "persim/special.hpp"

using namespace persim;

namespace {

double expr_param(const std::string& body, const std::string& key) {
    const auto pos = body.find(key + "=");
    if (pos == std::string::npos)
        throw std::invalid_argument("missing '" + key + "' in: " + body);
    return std::strtod(body.c_str() + pos + key.size() + 1, nullptr);
}

void print_special_row(const std::string& fn, const std::string& params, double value,
                       double err) {
    std::printf("%s,%s,%.17g,%.17g\n", fn.c_str(), params.c_str(), value, err);
}

int run_special(const std::vector<std::string>& exprs) {
    std::printf("function,params,value,error_estimate\n");
    for (const auto& expr : exprs) {
        const auto colon = expr.find(':');
        const std::string fn = expr.substr(0, colon);
        const std::string body = (colon == std::string::npos) ? "" : expr.substr(colon + 1);
        if (fn == "psi") {
            print_special_row(fn, body, psi(expr_param(body, "alpha"), expr_param(body, "x")),
                              0.0);
        } else if (fn == "selberg") {
            PHParams p{expr_param(body, "p"), expr_param(body, "H")};
            print_special_row(fn, body, selberg_f11(p), 0.0);
        } else if (fn == "f") {
            PHParams p{expr_param(body, "p"), expr_param(body, "H")};
            auto r = f_ph(p, expr_param(body, "a"), expr_param(body, "b"));
            print_special_row(fn, body, r.value, r.abs_error_estimate);
        } else if (fn == "cph") {
            PHParams p{expr_param(body, "p"), expr_param(body, "H")};
            print_special_row(fn, body, c_ph(p, expr_param(body, "tau")), 0.0);
        } else if (fn == "cphbounds") {
            PHParams p{expr_param(body, "p"), expr_param(body, "H")};
            auto [lo, hi] = c_ph_bounds(p, expr_param(body, "tau"), expr_param(body, "N"));
            print_special_row(fn + ".lower", body, lo, 0.0);
            print_special_row(fn + ".upper", body, hi, 0.0);
        } else if (fn == "dalpha") {
            const auto kpos = body.find("kernel=");
            if (kpos == std::string::npos)
                throw std::invalid_argument("dalpha needs kernel=<id>: " + expr);
            std::string kid = body.substr(kpos + 7);
            if (auto comma = kid.find(",tau="); comma != std::string::npos) kid.resize(comma);
            auto kernel = CorrelationKernel::parse(kid);
            print_special_row(
                fn, body,
                d_alpha_rho(expr_param(body, "alpha"), kernel,
                            static_cast<int64_t>(expr_param(body, "tau"))),
                0.0);
        } else {
            throw std::invalid_argument("unknown special function: " + fn);
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"persim: persistence probabilities of weighted stationary Gaussian sums"};
    app.require_subcommand(1);

    uint64_t seed = 0;
    int64_t reps = 10000;
    std::string out;
    int threads = 0;
    app.add_option("--seed", seed, "random seed (64-bit)");
    app.add_option("--reps", reps, "Monte Carlo replications");
    app.add_option("--out", out, "output path");
    app.add_option("--threads", threads, "worker threads (results do not depend on this)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "sample stationary paths / weighted sums");
    std::string sim_kernel = "delta", sim_weights;
    int64_t sim_n = 64;
    sim->add_option("--kernel", sim_kernel, "correlation kernel id");
    sim->add_option("--weights", sim_weights, "optional weight id: dump S instead of xi");
    sim->add_option("--n", sim_n, "path length");

    // special
    auto* spec = app.add_subcommand("special", "evaluate special functions as CSV");
    std::vector<std::string> spec_exprs;
    spec->add_option("expr", spec_exprs, "e.g. selberg:p=0,H=0.75 cph:p=0,H=0.75,tau=1")
        ->required();

    // gram export
    auto* gram_cmd = app.add_subcommand("gram", "export a Gram matrix as CSV");
    std::string gram_kernel = "delta", gram_weights = "poly:p=0", gram_corr;
    int64_t gram_n = 16;
    double gram_delta = 0.0;
    gram_cmd->add_option("--kernel", gram_kernel, "correlation kernel id");
    gram_cmd->add_option("--weights", gram_weights, "weight id");
    gram_cmd->add_option("--corr", gram_corr, "stationary grid correlation id instead");
    gram_cmd->add_option("--delta", gram_delta, "grid spacing for --corr");
    gram_cmd->add_option("--n", gram_n, "matrix size");

    // estimate
    auto* est = app.add_subcommand("estimate", "run a persistence experiment config");
    std::string est_config;
    std::string est_fit = "none";
    est->add_option("--config", est_config, "experiment JSON")->required();
    est->add_option("--fit", est_fit, "also fit: log-n | log-s | linear");

    // sweep
    auto* sw = app.add_subcommand("sweep", "fitted-exponent curve over a parameter grid");
    std::string sw_param, sw_config;
    std::vector<double> sw_grid;
    sw->add_option("--parameter", sw_param, "p | H | alpha")->required();
    sw->add_option("--grid", sw_grid, "grid values")->required()->delimiter(',');
    sw->add_option("--config", sw_config, "base experiment JSON (T ladder)")->required();

    // reproduce
    auto* rep = app.add_subcommand("reproduce", "run a reproduction suite (A1..A10, props, all)");
    std::string rep_suite;
    rep->add_option("suite", rep_suite, "suite id")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();
    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (sim->parsed()) {
            auto kernel = CorrelationKernel::parse(sim_kernel);
            auto emb = circulant_embed(kernel, sim_n);
            auto batch = sample_stationary(emb, reps, sim_n, seed);
            if (!sim_weights.empty())
                batch = weighted_partial_sums(batch, WeightSequence::parse(sim_weights));
            std::string path = out.empty() ? "paths.bin" : out;
            if (!std::filesystem::path(path).is_absolute())
                path = (std::filesystem::path(default_output_dir()) / path).string();
            write_pathbatch(batch, path);
            std::printf("wrote %lld x %lld paths (scheme %s, clipped_mass %.3g) to %s\n",
                        static_cast<long long>(batch.R), static_cast<long long>(batch.n),
                        batch.stream_scheme.c_str(), emb.clipped_mass, path.c_str());
            return 0;
        }
        if (spec->parsed()) return run_special(spec_exprs);
        if (gram_cmd->parsed()) {
            GramMatrix gram;
            if (!gram_corr.empty()) {
                gram = gram_stationary(parse_grid_corr(gram_corr), gram_delta, gram_n,
                                       gram_corr);
            } else {
                gram = gram_S(CorrelationKernel::parse(gram_kernel),
                              WeightSequence::parse(gram_weights), gram_n);
            }
            if (out.empty()) {
                std::ostringstream text;
                write_gram_csv(gram, text);
                std::fputs(text.str().c_str(), stdout);
            } else {
                std::ofstream file(out, std::ios::binary);
                write_gram_csv(gram, file);
                std::printf("wrote %lld x %lld gram to %s\n",
                            static_cast<long long>(gram.size()),
                            static_cast<long long>(gram.size()), out.c_str());
            }
            return 0;
        }
        if (est->parsed()) {
            auto cfg = ExperimentConfig::from_file(est_config);
            if (!out.empty()) cfg.out_path = out;
            if (seed != 0) cfg.seed = seed;
            auto rows = run_experiment(cfg);
            for (const auto& row : rows) std::printf("%s\n", row.csv().c_str());
            if (est_fit != "none") {
                std::vector<LadderPoint> pts;
                for (const auto& row : rows) {
                    ProbabilityEstimate e;
                    e.log_p = row.value;
                    e.stderr_log = row.stderr_value;
                    e.usable = std::isfinite(row.value);
                    pts.push_back({row.abscissa, e});
                }
                if (est_fit == "linear") {
                    auto fit = exponent_fit_linear(pts);
                    std::printf("# theta_hat=%.6g ci95=[%.6g,%.6g] r2=%.4f\n",
                                fit.fit.exponent, fit.fit.ci95.first, fit.fit.ci95.second,
                                fit.fit.r_squared);
                } else {
                    auto weights = WeightSequence::parse(
                        cfg.weights_id.empty() ? "poly:p=0" : cfg.weights_id);
                    auto fit = exponent_fit_loglog(
                        pts, weights,
                        est_fit == "log-s" ? Regressor::log_s : Regressor::log_n);
                    std::printf("# slope=%.6g ci95=[%.6g,%.6g] r2=%.4f\n", fit.exponent,
                                fit.ci95.first, fit.ci95.second, fit.r_squared);
                }
            }
            return 0;
        }
        if (sw->parsed()) {
            auto base = ExperimentConfig::from_file(sw_config);
            if (seed != 0) base.seed = seed;
            auto rows = sweep(sw_param, sw_grid, base);
            std::string path = out.empty() ? base.experiment_id + "_sweep.csv" : out;
            if (!std::filesystem::path(path).is_absolute())
                path = (std::filesystem::path(default_output_dir()) / path).string();
            write_result_csv(rows, path);
            for (const auto& row : rows) std::printf("%s\n", row.csv().c_str());
            std::printf("# curve written to %s\n", path.c_str());
            return 0;
        }
        if (rep->parsed()) {
            auto suite = reproduce(rep_suite);
            for (const auto& row : suite.rows)
                std::printf("[%s] %-60s measured=%-12.6g (%s) %s\n", row.id.c_str(),
                            row.description.c_str(), row.measured, row.detail.c_str(),
                            row.pass ? "PASS" : "FAIL");
            return suite.all_pass() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
