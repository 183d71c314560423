#include "persim/reference.hpp"

#include <cmath>

#include "persim/fft.hpp"
#include "persim/rng.hpp"

namespace persim::reference {

Eigen::MatrixXd gram_S_naive(const CorrelationKernel& kernel,
                             const WeightSequence& weights, int64_t n) {
    Eigen::MatrixXd out(n, n);
    for (int64_t k = 1; k <= n; ++k) {
        for (int64_t l = 1; l <= n; ++l) {
            double acc = 0.0;
            for (int64_t i = 1; i <= k; ++i) {
                double inner = 0.0;
                for (int64_t j = 1; j <= l; ++j)
                    inner += weights.sigma(j) * kernel.rho(std::llabs(i - j));
                acc += weights.sigma(i) * inner;
            }
            out(k - 1, l - 1) = acc;
        }
    }
    return out;
}

std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& in) {
    const size_t n = in.size();
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc = 0.0;
        for (size_t j = 0; j < n; ++j) {
            const double phase = -2.0 * M_PI * static_cast<double>(j * k % n) / n;
            acc += in[j] * std::complex<double>(std::cos(phase), std::sin(phase));
        }
        out[k] = acc;
    }
    return out;
}

PathBatch sample_stationary_serial(const SpectralEmbedding& embedding, int64_t R,
                                   int64_t n, uint64_t seed) {
    PathBatch batch;
    batch.R = R;
    batch.n = n;
    batch.seed = seed;
    batch.values.resize(static_cast<size_t>(R) * n);

    if (embedding.white) {
        batch.stream_scheme = "philox4x32-10/iid";
        for (int64_t r = 0; r < R; ++r) {
            CounterRng rng(seed, static_cast<uint64_t>(r));
            rng.fill_normals(0, batch.row(r));
        }
        return batch;
    }

    batch.stream_scheme = "philox4x32-10/ce";
    const int64_t ext = embedding.extended_size();
    std::vector<std::complex<double>> g(ext);
    for (int64_t q = 0; q < (R + 1) / 2; ++q) {
        CounterRng rng(seed, static_cast<uint64_t>(q));
        for (int64_t k = 0; k < ext; ++k) {
            const double amp =
                std::sqrt(embedding.eigenvalues[k] / static_cast<double>(ext));
            g[k] = {amp * rng.normal_at(2 * k), amp * rng.normal_at(2 * k + 1)};
        }
        fft::backward(g);
        double* row0 = batch.values.data() + (2 * q) * n;
        for (int64_t i = 0; i < n; ++i) row0[i] = g[i].real();
        if (2 * q + 1 < R) {
            double* row1 = batch.values.data() + (2 * q + 1) * n;
            for (int64_t i = 0; i < n; ++i) row1[i] = g[i].imag();
        }
    }
    return batch;
}

int64_t persistence_hits_serial(const PathBatch& paths, double r, int64_t n_prefix) {
    int64_t hits = 0;
    for (int64_t rep = 0; rep < paths.R; ++rep) {
        const double* row = paths.values.data() + rep * paths.n;
        bool below = true;
        for (int64_t i = 0; i < n_prefix && below; ++i) below = row[i] < r;
        hits += below;
    }
    return hits;
}

} // namespace persim::reference
