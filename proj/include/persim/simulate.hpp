// Exact sampling of stationary Gaussian sequences via circulant embedding
// (Cholesky fallback for general Gram matrices) and weighted partial sums.
// All randomness is counter-based, so batches are bit-reproducible for any
// thread count.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "persim/covariance.hpp"
#include "persim/kernels.hpp"

namespace persim {

struct EmbeddingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpectralEmbedding {
    int64_t n = 0;                   // supported path length
    std::vector<double> eigenvalues; // circulant spectrum, size 2m, clipped >= 0
    double clipped_mass = 0.0;       // relative mass removed by clipping
    bool white = false;              // identity spectrum: sample i.i.d. directly
    std::string kernel_id;

    int64_t extended_size() const { return static_cast<int64_t>(eigenvalues.size()); }
};

struct PathBatch {
    int64_t R = 0;
    int64_t n = 0;
    uint64_t seed = 0;
    std::string stream_scheme;
    std::vector<double> values; // R x n, row-major

    std::span<const double> row(int64_t r) const {
        return {values.data() + r * n, static_cast<size_t>(n)};
    }
    std::span<double> row(int64_t r) {
        return {values.data() + r * n, static_cast<size_t>(n)};
    }
};

// Circulant extension of (rho(0), ..., rho(m)) at size 2m, the smallest
// power of two >= 2n; spectrum by FFT, negatives clipped. Throws
// EmbeddingError when the clipped mass exceeds 1e-6 of the spectral mass.
SpectralEmbedding circulant_embed(const CorrelationKernel& kernel, int64_t n);

// R independent paths of length n <= embedding.n, exactly N(0, Toeplitz)
// when clipped_mass is 0. Streams are keyed per replication (pair).
PathBatch sample_stationary(const SpectralEmbedding& embedding, int64_t R, int64_t n,
                            uint64_t seed);

// Exact sampling from an arbitrary Gram matrix: O(n^3 + R n^2). Negative
// eigenvalues within tolerance are clipped (with a warning) before
// factorization.
PathBatch cholesky_sample(const GramMatrix& gram, int64_t R, uint64_t seed);

// Row-wise prefix sums of sigma(i) * xi_i.
PathBatch weighted_partial_sums(const PathBatch& xi, const WeightSequence& weights);

// Binary replay dump: 32-byte header (8-byte magic "PSIMPB01", u64 R, n,
// seed), then R*n little-endian doubles, row-major.
void write_pathbatch(const PathBatch& batch, const std::string& path);
PathBatch read_pathbatch(const std::string& path);

} // namespace persim
