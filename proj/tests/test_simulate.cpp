#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include <omp.h>

#include "persim/covariance.hpp"
#include "persim/reference.hpp"
#include "persim/rng.hpp"
#include "persim/simulate.hpp"

using namespace persim;

namespace {

// mean and stderr of per-replication lag products
std::pair<double, double> empirical_rho(const PathBatch& paths, int64_t lag) {
    double sum = 0.0, sum2 = 0.0;
    for (int64_t r = 0; r < paths.R; ++r) {
        auto row = paths.row(r);
        double m = 0.0;
        for (int64_t i = 0; i + lag < paths.n; ++i) m += row[i] * row[i + lag];
        m /= static_cast<double>(paths.n - lag);
        sum += m;
        sum2 += m * m;
    }
    const double mean = sum / paths.R;
    const double var = (sum2 / paths.R - mean * mean) / (paths.R - 1.0);
    return {mean, std::sqrt(var)};
}

} // namespace

TEST_CASE("circulant_embed spectra") {
    auto delta_emb = circulant_embed(CorrelationKernel::kronecker_delta(), 8);
    CHECK(delta_emb.extended_size() == 16);
    CHECK(delta_emb.clipped_mass == 0.0);
    CHECK(delta_emb.white);
    for (double ev : delta_emb.eigenvalues) CHECK(ev == doctest::Approx(1.0).epsilon(1e-12));

    auto fgn_emb = circulant_embed(CorrelationKernel::fgn(0.75), 1024);
    CHECK(fgn_emb.clipped_mass == 0.0);
    CHECK_FALSE(fgn_emb.white);

    auto exp_emb = circulant_embed(CorrelationKernel::exponential(1.0), 64);
    CHECK(exp_emb.clipped_mass == 0.0);

    // spectrum matches a naive DFT of the circulant first row
    auto k = CorrelationKernel::exponential(0.5);
    auto emb = circulant_embed(k, 16);
    std::vector<std::complex<double>> c(32);
    for (int i = 0; i <= 16; ++i) c[i] = k.rho(i);
    for (int i = 1; i < 16; ++i) c[32 - i] = c[i];
    auto spec = reference::dft_naive(c);
    for (int i = 0; i < 32; ++i)
        CHECK(emb.eigenvalues[i] == doctest::Approx(spec[i].real()).epsilon(1e-10));
}

TEST_CASE("sampling reproducibility is independent of thread count") {
    auto emb = circulant_embed(CorrelationKernel::fgn(0.75), 64);
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    auto one = sample_stationary(emb, 33, 64, 99);
    omp_set_num_threads(2);
    auto two = sample_stationary(emb, 33, 64, 99);
    omp_set_num_threads(saved);
    REQUIRE(one.values.size() == two.values.size());
    CHECK(std::memcmp(one.values.data(), two.values.data(),
                      one.values.size() * sizeof(double)) == 0);

    // and matches the serial reference implementation bit for bit
    auto serial = reference::sample_stationary_serial(emb, 33, 64, 99);
    CHECK(std::memcmp(one.values.data(), serial.values.data(),
                      one.values.size() * sizeof(double)) == 0);

    // regenerating with the same key reproduces identical values
    auto again = sample_stationary(emb, 33, 64, 99);
    CHECK(one.stream_scheme == again.stream_scheme);
    CHECK(std::memcmp(one.values.data(), again.values.data(),
                      one.values.size() * sizeof(double)) == 0);
}

TEST_CASE("sample_stationary first moments") {
    // iid kernel: lag-1 correlation ~ 0, unit variance
    auto emb = circulant_embed(CorrelationKernel::kronecker_delta(), 2);
    auto paths = sample_stationary(emb, 100000, 2, 7);
    CHECK(paths.stream_scheme == "philox4x32-10/iid");
    double cross = 0.0, var0 = 0.0;
    for (int64_t r = 0; r < paths.R; ++r) {
        cross += paths.row(r)[0] * paths.row(r)[1];
        var0 += paths.row(r)[0] * paths.row(r)[0];
    }
    cross /= paths.R;
    var0 /= paths.R;
    CHECK(std::fabs(cross) <= 3.0 / std::sqrt(static_cast<double>(paths.R)));
    CHECK(std::fabs(var0 - 1.0) <= 3.0 * std::sqrt(2.0 / paths.R));
}

TEST_CASE("simulation exactness: empirical correlations within 5 stderr") {
    for (const auto& kernel :
         {CorrelationKernel::fgn(0.75), CorrelationKernel::exponential(1.0)}) {
        auto emb = circulant_embed(kernel, 64);
        REQUIRE(emb.clipped_mass == 0.0);
        auto paths = sample_stationary(emb, 200000, 64, 20240501);
        for (int64_t lag = 0; lag <= 10; ++lag) {
            auto [mean, se] = empirical_rho(paths, lag);
            CHECK(std::fabs(mean - kernel.rho(lag)) <= 5.0 * se);
        }
    }
}

TEST_CASE("fgn empirical lag-1 against the closed form") {
    auto emb = circulant_embed(CorrelationKernel::fgn(0.75), 16);
    auto paths = sample_stationary(emb, 100000, 16, 31337);
    auto [mean, se] = empirical_rho(paths, 1);
    CHECK(std::fabs(mean - 0.41421356237309515) <= 3.0 * se);
}

TEST_CASE("cholesky_sample covariance") {
    auto gram = gram_S(CorrelationKernel::kronecker_delta(), WeightSequence::polynomial(0.0), 2);
    auto paths = cholesky_sample(gram, 100000, 11);
    double c00 = 0, c01 = 0, c11 = 0;
    for (int64_t r = 0; r < paths.R; ++r) {
        auto row = paths.row(r);
        c00 += row[0] * row[0];
        c01 += row[0] * row[1];
        c11 += row[1] * row[1];
    }
    c00 /= paths.R;
    c01 /= paths.R;
    c11 /= paths.R;
    const double se = 3.0 * std::sqrt(2.0 / paths.R) * 2.0;
    CHECK(std::fabs(c00 - 1.0) <= se);
    CHECK(std::fabs(c01 - 1.0) <= se);
    CHECK(std::fabs(c11 - 2.0) <= 2.0 * se);

    // n = 1: plain standard normals
    GramMatrix unit;
    unit.m = Eigen::MatrixXd::Identity(1, 1);
    auto single = cholesky_sample(unit, 50000, 5);
    double var = 0.0;
    for (int64_t r = 0; r < single.R; ++r) var += single.row(r)[0] * single.row(r)[0];
    CHECK(var / single.R == doctest::Approx(1.0).epsilon(0.05));

    // OU grid Toeplitz(1, 1/2, 1/4): empirical lag-2 correlation = 1/4
    auto ou = gram_stationary([](double t) { return std::exp(-t); }, std::log(2.0), 3, "ou");
    auto op = cholesky_sample(ou, 100000, 3);
    double l2 = 0.0;
    for (int64_t r = 0; r < op.R; ++r) l2 += op.row(r)[0] * op.row(r)[2];
    l2 /= op.R;
    CHECK(std::fabs(l2 - 0.25) <= 3.0 * std::sqrt(2.0 / op.R));
}

TEST_CASE("weighted_partial_sums") {
    PathBatch xi;
    xi.R = 2;
    xi.n = 3;
    xi.values = {1.0, -2.0, 3.0, 1.0, 1.0, 0.0};
    auto ones = weighted_partial_sums(xi, WeightSequence::polynomial(0.0));
    CHECK(ones.values == std::vector<double>{1.0, -1.0, 2.0, 1.0, 2.0, 2.0});
    auto lin = weighted_partial_sums(xi, WeightSequence::polynomial(1.0));
    CHECK(lin.row(1)[0] == 1.0);
    CHECK(lin.row(1)[1] == 3.0);
}

TEST_CASE("weighted sums match gram_S empirically") {
    const auto kernel = CorrelationKernel::exponential(1.0);
    const auto weights = WeightSequence::polynomial(0.5);
    auto gram = gram_S(kernel, weights, 16);
    auto emb = circulant_embed(kernel, 16);
    auto xi = sample_stationary(emb, 200000, 16, 777);
    auto s = weighted_partial_sums(xi, weights);
    // entrywise within 5 stderr; moment-based stderr estimate per entry
    for (int64_t a : {0, 3, 7, 15}) {
        for (int64_t b : {0, 7, 15}) {
            double m = 0.0, m2 = 0.0;
            for (int64_t r = 0; r < s.R; ++r) {
                const double v = s.row(r)[a] * s.row(r)[b];
                m += v;
                m2 += v * v;
            }
            m /= s.R;
            m2 /= s.R;
            const double se = std::sqrt((m2 - m * m) / s.R);
            CHECK(std::fabs(m - gram.m(a, b)) <= 5.0 * se);
        }
    }
    // cov(S_1, S_2) for the iid kernel is sigma(1)^2 = 1
    auto demb = circulant_embed(CorrelationKernel::kronecker_delta(), 2);
    auto dxi = sample_stationary(demb, 100000, 2, 778);
    auto ds = weighted_partial_sums(dxi, WeightSequence::polynomial(0.0));
    double c12 = 0.0;
    for (int64_t r = 0; r < ds.R; ++r) c12 += ds.row(r)[0] * ds.row(r)[1];
    c12 /= ds.R;
    CHECK(std::fabs(c12 - 1.0) <= 3.0 * std::sqrt(3.0 / ds.R));
}

TEST_CASE("pathbatch binary dump round trip") {
    auto emb = circulant_embed(CorrelationKernel::exponential(0.5), 8);
    auto paths = sample_stationary(emb, 5, 8, 4242);
    const std::string file = std::filesystem::temp_directory_path() / "persim_batch_test.bin";
    write_pathbatch(paths, file);
    auto loaded = read_pathbatch(file);
    CHECK(loaded.R == paths.R);
    CHECK(loaded.n == paths.n);
    CHECK(loaded.seed == paths.seed);
    CHECK(loaded.values == paths.values);
    CHECK(std::filesystem::file_size(file) == 32 + 5 * 8 * sizeof(double));
    std::filesystem::remove(file);
    CHECK_THROWS(read_pathbatch("/nonexistent/persim.bin"));
}
