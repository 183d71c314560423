// Thin FFTW wrapper: cached plans per size, new-array execution so
// concurrent transforms on per-thread buffers are safe.
#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

#include <fftw3.h>

namespace persim::fft {

namespace detail {

struct PlanCache {
    std::mutex mutex;
    std::map<std::pair<size_t, int>, fftw_plan> plans;

    fftw_plan get(size_t n, int sign) {
        std::lock_guard<std::mutex> lock(mutex);
        auto key = std::make_pair(n, sign);
        auto it = plans.find(key);
        if (it != plans.end()) return it->second;
        std::vector<std::complex<double>> probe(n);
        fftw_plan plan = fftw_plan_dft_1d(
            static_cast<int>(n),
            reinterpret_cast<fftw_complex*>(probe.data()),
            reinterpret_cast<fftw_complex*>(probe.data()),
            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans.emplace(key, plan);
        return plan;
    }
};

inline PlanCache& cache() {
    static PlanCache instance;
    return instance;
}

inline void execute(std::vector<std::complex<double>>& data, int sign) {
    if (data.empty()) return;
    fftw_plan plan = cache().get(data.size(), sign);
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
}

} // namespace detail

// In-place unnormalized DFT, e^{-2 pi i jk/n} convention.
inline void forward(std::vector<std::complex<double>>& data) {
    detail::execute(data, FFTW_FORWARD);
}

// In-place unnormalized inverse DFT (conjugate exponent, no 1/n factor).
inline void backward(std::vector<std::complex<double>>& data) {
    detail::execute(data, FFTW_BACKWARD);
}

} // namespace persim::fft
