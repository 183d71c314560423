// Counter-based random streams (Philox4x32-10) and normal-distribution
// helpers. Every variate is addressable by (seed, stream, index), so
// parallel generation is order-independent and exactly reproducible.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace persim {

namespace detail {

inline void philox_round(std::array<uint32_t, 4>& x, const std::array<uint32_t, 2>& k) {
    constexpr uint64_t M0 = 0xD2511F53ull;
    constexpr uint64_t M1 = 0xCD9E8D57ull;
    const uint64_t p0 = M0 * x[0];
    const uint64_t p1 = M1 * x[2];
    x = {static_cast<uint32_t>(p1 >> 32) ^ x[1] ^ k[0],
         static_cast<uint32_t>(p1),
         static_cast<uint32_t>(p0 >> 32) ^ x[3] ^ k[1],
         static_cast<uint32_t>(p0)};
}

} // namespace detail

// One 10-round Philox4x32 block: 128 bits of counter, 64 bits of key.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> ctr,
                                          std::array<uint32_t, 2> key) {
    constexpr uint32_t W0 = 0x9E3779B9u;
    constexpr uint32_t W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(ctr, key);
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// A logical random stream identified by (seed, stream). Index-addressable:
// uniform_at(i) and normal_at(i) are pure functions of (seed, stream, i).
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream) : seed_(seed), stream_(stream) {}

    // Two doubles in (0,1) per 128-bit block.
    double uniform_at(uint64_t index) const {
        const uint64_t block = index >> 1;
        const auto words = philox4x32(
            {static_cast<uint32_t>(block), static_cast<uint32_t>(block >> 32),
             static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)},
            {static_cast<uint32_t>(seed_), static_cast<uint32_t>(seed_ >> 32)});
        const uint64_t bits = (index & 1)
            ? (static_cast<uint64_t>(words[3]) << 32) | words[2]
            : (static_cast<uint64_t>(words[1]) << 32) | words[0];
        // 53 significant bits, offset to stay strictly inside (0,1).
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
    }

    double normal_at(uint64_t index) const;

    void fill_normals(uint64_t start_index, std::span<double> out) const;

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

private:
    uint64_t seed_;
    uint64_t stream_;
};

// Standard normal CDF.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

// Inverse standard normal CDF, Wichura's rational approximations
// (|relative error| < 1e-15 over (0,1)).
inline double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -INFINITY;
        if (p == 1.0) return INFINITY;
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        value =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -value : value;
}

inline double CounterRng::normal_at(uint64_t index) const {
    return norm_quantile(uniform_at(index));
}

inline void CounterRng::fill_normals(uint64_t start_index, std::span<double> out) const {
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = norm_quantile(uniform_at(start_index + i));
}

} // namespace persim
