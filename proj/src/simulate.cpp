#include "persim/simulate.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <iostream>

#include <Eigen/Dense>

#include "persim/fft.hpp"
#include "persim/rng.hpp"

namespace persim {

namespace {

constexpr int64_t kMaxPathLength = int64_t{1} << 22;
constexpr double kClipTolerance = 1e-6;
constexpr char kMagic[8] = {'P', 'S', 'I', 'M', 'P', 'B', '0', '1'};

} // namespace

SpectralEmbedding circulant_embed(const CorrelationKernel& kernel, int64_t n) {
    if (n < 1) throw std::invalid_argument("circulant_embed: n must be >= 1");
    if (n > kMaxPathLength)
        throw std::invalid_argument("circulant_embed: n beyond desk-scale cap 2^22");
    const int64_t ext = static_cast<int64_t>(std::bit_ceil(static_cast<uint64_t>(2 * n)));
    const int64_t m = ext / 2;

    std::vector<std::complex<double>> c(ext);
    for (int64_t k = 0; k <= m; ++k) c[k] = kernel.rho(k);
    for (int64_t k = 1; k < m; ++k) c[ext - k] = c[k];
    fft::forward(c);

    SpectralEmbedding emb;
    emb.n = n;
    emb.kernel_id = kernel.id();
    emb.eigenvalues.resize(ext);
    double clipped = 0.0, total = 0.0;
    bool white = true;
    for (int64_t k = 0; k < ext; ++k) {
        const double lambda = c[k].real();
        total += std::fabs(lambda);
        if (lambda < 0.0) {
            clipped += -lambda;
            emb.eigenvalues[k] = 0.0;
        } else {
            emb.eigenvalues[k] = lambda;
        }
        white = white && std::fabs(lambda - 1.0) <= 1e-12;
    }
    emb.clipped_mass = clipped / total;
    emb.white = white;
    if (emb.clipped_mass > kClipTolerance)
        throw EmbeddingError("circulant_embed: clipped spectral mass " +
                             std::to_string(emb.clipped_mass) +
                             " exceeds 1e-6; fall back to cholesky_sample");
    return emb;
}

PathBatch sample_stationary(const SpectralEmbedding& embedding, int64_t R, int64_t n,
                            uint64_t seed) {
    if (R < 1) throw std::invalid_argument("sample_stationary: R must be >= 1");
    if (n < 1 || n > embedding.n)
        throw std::invalid_argument("sample_stationary: n must be in [1, embedding.n]");

    PathBatch batch;
    batch.R = R;
    batch.n = n;
    batch.seed = seed;
    batch.values.resize(static_cast<size_t>(R) * n);

    if (embedding.white) {
        batch.stream_scheme = "philox4x32-10/iid";
#pragma omp parallel for schedule(static)
        for (int64_t r = 0; r < R; ++r) {
            CounterRng rng(seed, static_cast<uint64_t>(r));
            rng.fill_normals(0, batch.row(r));
        }
        return batch;
    }

    batch.stream_scheme = "philox4x32-10/ce";
    const int64_t ext = embedding.extended_size();
    const int64_t pairs = (R + 1) / 2;
    // One complex FFT per replication pair: real and imaginary parts of the
    // synthesized field are independent N(0, Toeplitz) paths.
#pragma omp parallel
    {
        std::vector<std::complex<double>> g(ext);
#pragma omp for schedule(static)
        for (int64_t q = 0; q < pairs; ++q) {
            CounterRng rng(seed, static_cast<uint64_t>(q));
            for (int64_t k = 0; k < ext; ++k) {
                const double amp = std::sqrt(embedding.eigenvalues[k] /
                                             static_cast<double>(ext));
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
    }
    return batch;
}

PathBatch cholesky_sample(const GramMatrix& gram, int64_t R, uint64_t seed) {
    if (R < 1) throw std::invalid_argument("cholesky_sample: R must be >= 1");
    const int64_t n = gram.size();

    Eigen::MatrixXd factor;
    Eigen::LLT<Eigen::MatrixXd> llt(gram.m);
    if (llt.info() == Eigen::Success) {
        factor = llt.matrixL();
    } else {
        // borderline PSD: clip small negative eigenvalues to zero
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram.m);
        Eigen::VectorXd ev = es.eigenvalues();
        const double tol = -1e-8 * gram.m.diagonal().maxCoeff();
        if (ev.minCoeff() < tol)
            throw std::runtime_error("cholesky_sample: gram fails the PSD tolerance");
        std::cerr << "cholesky_sample: clipping eigenvalues in [" << ev.minCoeff()
                  << ", 0) to zero\n";
        factor = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    }

    PathBatch batch;
    batch.R = R;
    batch.n = n;
    batch.seed = seed;
    batch.stream_scheme = "philox4x32-10/chol";
    batch.values.resize(static_cast<size_t>(R) * n);
#pragma omp parallel
    {
        Eigen::VectorXd eta(n);
#pragma omp for schedule(static)
        for (int64_t r = 0; r < R; ++r) {
            CounterRng rng(seed, static_cast<uint64_t>(r));
            for (int64_t i = 0; i < n; ++i) eta[i] = rng.normal_at(i);
            Eigen::Map<Eigen::VectorXd> row(batch.values.data() + r * n, n);
            row.noalias() = factor * eta;
        }
    }
    return batch;
}

PathBatch weighted_partial_sums(const PathBatch& xi, const WeightSequence& weights) {
    PathBatch out;
    out.R = xi.R;
    out.n = xi.n;
    out.seed = xi.seed;
    out.stream_scheme = xi.stream_scheme;
    out.values.resize(xi.values.size());
    std::vector<double> sig(static_cast<size_t>(xi.n));
    for (int64_t i = 0; i < xi.n; ++i) sig[i] = weights.sigma(i + 1);
#pragma omp parallel for schedule(static)
    for (int64_t r = 0; r < xi.R; ++r) {
        const double* in = xi.values.data() + r * xi.n;
        double* o = out.values.data() + r * xi.n;
        double run = 0.0;
        for (int64_t i = 0; i < xi.n; ++i) {
            run += sig[i] * in[i];
            o[i] = run;
        }
    }
    return out;
}

void write_pathbatch(const PathBatch& batch, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pathbatch: cannot open " + path);
    uint64_t header[3] = {static_cast<uint64_t>(batch.R), static_cast<uint64_t>(batch.n),
                          batch.seed};
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(batch.values.data()),
              static_cast<std::streamsize>(batch.values.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write_pathbatch: write failed for " + path);
}

PathBatch read_pathbatch(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pathbatch: cannot open " + path);
    char magic[8];
    uint64_t header[3];
    in.read(magic, sizeof(magic));
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("read_pathbatch: bad header in " + path);
    PathBatch batch;
    batch.R = static_cast<int64_t>(header[0]);
    batch.n = static_cast<int64_t>(header[1]);
    batch.seed = header[2];
    batch.stream_scheme = "replay";
    batch.values.resize(static_cast<size_t>(batch.R) * batch.n);
    in.read(reinterpret_cast<char*>(batch.values.data()),
            static_cast<std::streamsize>(batch.values.size() * sizeof(double)));
    if (!in) throw std::runtime_error("read_pathbatch: truncated file " + path);
    return batch;
}

} // namespace persim
