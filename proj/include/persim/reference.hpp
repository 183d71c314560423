// Serial reference implementations of the parallel kernels. Slow by
// construction; kept for equivalence tests and the benchmark target.
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "persim/covariance.hpp"
#include "persim/kernels.hpp"
#include "persim/simulate.hpp"

namespace persim::reference {

// Entry-by-entry Gram assembly with the same inner accumulation order as
// the two-pass kernel (j ascending inside i ascending), O(n^4) overall.
Eigen::MatrixXd gram_S_naive(const CorrelationKernel& kernel,
                             const WeightSequence& weights, int64_t n);

// O(m^2) DFT, for validating circulant spectra on small sizes.
std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& in);

// Single-threaded copy of the stationary sampler (same streams, same
// arithmetic; must reproduce the parallel result bit for bit).
PathBatch sample_stationary_serial(const SpectralEmbedding& embedding, int64_t R,
                                   int64_t n, uint64_t seed);

// Single-threaded hit counting.
int64_t persistence_hits_serial(const PathBatch& paths, double r, int64_t n_prefix);

} // namespace persim::reference
