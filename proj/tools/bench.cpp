// Benchmarks the OpenMP kernels against their serial references and
// reports single- vs multi-thread timings.
#include <chrono>
#include <cstdio>
#include <cstring>

#include <omp.h>

#include "persim/covariance.hpp"
#include "persim/estimate.hpp"
#include "persim/harness.hpp"
#include "persim/reference.hpp"
#include "persim/simulate.hpp"

using namespace persim;
using clock_type = std::chrono::steady_clock;

namespace {

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

template <class F>
double timed(F&& f) {
    const auto t0 = clock_type::now();
    f();
    return ms_since(t0);
}

void report(const char* name, double serial_ms, double omp_ms, bool identical) {
    std::printf("%-34s %10.1f ms %10.1f ms %7.2fx   %s\n", name, serial_ms, omp_ms,
                serial_ms / omp_ms, identical ? "identical" : "MISMATCH");
}

} // namespace

int main() {
    const int max_threads = omp_get_max_threads();
    std::printf("persim kernels: serial reference vs OpenMP (%d threads)\n", max_threads);
    std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    {
        auto kernel = CorrelationKernel::fgn(0.7);
        auto weights = WeightSequence::polynomial(0.5);
        Eigen::MatrixXd naive;
        GramMatrix fast;
        const double t_naive = timed([&] { naive = reference::gram_S_naive(kernel, weights, 160); });
        const double t_fast = timed([&] { fast = gram_S(kernel, weights, 160); });
        report("gram assembly n=160 (naive O(n^4))", t_naive, t_fast,
               (fast.m - naive).cwiseAbs().maxCoeff() == 0.0);
    }

    {
        auto emb = circulant_embed(CorrelationKernel::fgn(0.75), 1024);
        PathBatch serial, parallel;
        const double t_serial =
            timed([&] { serial = reference::sample_stationary_serial(emb, 4000, 1024, 11); });
        const double t_par = timed([&] { parallel = sample_stationary(emb, 4000, 1024, 11); });
        report("circulant sampling R=4000 n=1024", t_serial, t_par,
               std::memcmp(serial.values.data(), parallel.values.data(),
                           serial.values.size() * sizeof(double)) == 0);
    }

    {
        auto emb = circulant_embed(CorrelationKernel::exponential(0.5), 256);
        auto paths = sample_stationary(emb, 200000, 256, 13);
        int64_t serial_hits = 0;
        ProbabilityEstimate par;
        const double t_serial =
            timed([&] { serial_hits = reference::persistence_hits_serial(paths, 0.0, 256); });
        const double t_par = timed([&] { par = persistence_mc(paths, 0.0); });
        report("MC hit counting R=2e5 n=256", t_serial, t_par, par.hits == serial_hits);
    }

    {
        auto gram = gram_stationary(parse_grid_corr("cph:p=0.5,H=0.6"), 0.1, 200, "cph");
        ProbabilityEstimate one, many;
        omp_set_num_threads(1);
        const double t_one =
            timed([&] { one = orthant_qmc(gram, 0.0, int64_t{1} << 16, 17); });
        omp_set_num_threads(max_threads);
        const double t_many =
            timed([&] { many = orthant_qmc(gram, 0.0, int64_t{1} << 16, 17); });
        report("orthant QMC m=200 (1 vs all threads)", t_one, t_many,
               one.log_p == many.log_p);
    }

    {
        omp_set_num_threads(1);
        auto one = mc_ladder(CorrelationKernel::fgn(0.75), WeightSequence::polynomial(0.0),
                             {16, 64, 256}, 0.0, 100000, 19);
        const double t_one = timed([&] {
            one = mc_ladder(CorrelationKernel::fgn(0.75), WeightSequence::polynomial(0.0),
                            {16, 64, 256}, 0.0, 100000, 19);
        });
        omp_set_num_threads(max_threads);
        auto many = one;
        const double t_many = timed([&] {
            many = mc_ladder(CorrelationKernel::fgn(0.75), WeightSequence::polynomial(0.0),
                             {16, 64, 256}, 0.0, 100000, 19);
        });
        report("MC ladder R=1e5 n<=256 (1 vs all)", t_one, t_many,
               one[2].estimate.hits == many[2].estimate.hits);
    }

    return 0;
}
