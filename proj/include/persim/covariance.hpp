// Exact finite-dimensional covariance structures: the interpolated
// covariance F_{rho,sigma}, Gram matrices of weighted partial sums,
// stationary-grid Toeplitz matrices, and scaling-limit diagnostics.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

#include "persim/kernels.hpp"

namespace persim {

enum class GramKind { weighted_sum, stationary_toeplitz };

struct GramMatrix {
    Eigen::MatrixXd m;
    GramKind kind = GramKind::weighted_sum;
    std::string metadata;
    double delta = 0.0; // grid spacing, stationary kind only

    int64_t size() const { return m.rows(); }
};

// cov(S_{l1}, S_{l2}) with the piecewise-constant interpolation: the exact
// double sum for integer arguments, exact fractional edge cells otherwise.
double F_rho_sigma(const CorrelationKernel& kernel, const WeightSequence& weights,
                   double l1, double l2);

// Gram matrix of (S_1, ..., S_n); O(n^2) two-pass assembly with a fixed
// per-row/per-column accumulation order (thread-count invariant).
GramMatrix gram_S(const CorrelationKernel& kernel, const WeightSequence& weights,
                  int64_t n);

// Toeplitz correlation matrix T[i][j] = corr(|i-j| delta), size m.
GramMatrix gram_stationary(const std::function<double(double)>& corr, double delta,
                           int64_t m, const std::string& id = "");

// F(u, bu) / (u^{2p+2H} f_{p,H}(1,b)); converges to kappa for nonsummable
// kernels with polynomial weights.
double limit_ratio_nonsummable(const CorrelationKernel& kernel,
                               const WeightSequence& weights, double u, double b);

// F(w(u), w(bu)) / u^2; converges to 1 + 2 sum rho(l) for summable kernels.
double limit_ratio_summable(const CorrelationKernel& kernel,
                            const WeightSequence& weights, double u, double b);

// PSD check at tolerance -1e-8 * max diagonal; throws std::runtime_error
// on violation. Returns the smallest eigenvalue when it was computed
// explicitly (NaN when a successful Cholesky certified PSD instead).
double validate_gram(const GramMatrix& gram);

// Row-major CSV with a metadata header line.
void write_gram_csv(const GramMatrix& gram, std::ostream& out);

} // namespace persim
