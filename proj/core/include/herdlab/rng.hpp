#pragma once

#include <cstdint>
#include <cmath>

namespace herdlab {

// All randomness derives from one user seed through keyed splitmix64 streams.
// A stream is addressed by (seed, replica, particle, purpose); the same
// address always reproduces the same draws, independently of how many other
// streams exist. This is what makes the finite system and the mean-field
// reference share Brownian paths particle by particle.

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace streams {
constexpr std::uint64_t kIdiosyncratic = 0x01;
constexpr std::uint64_t kCommon = 0x02;
constexpr std::uint64_t kInitialData = 0x03;
constexpr std::uint64_t kSubsample = 0x04;
constexpr std::uint64_t kValidation = 0x05;
constexpr std::uint64_t kOptimizer = 0x06;
constexpr std::uint64_t kFeynmanKac = 0x07;
constexpr std::uint64_t kObservable = 0x08;
constexpr std::uint64_t kCommonParticle = 0xffffffffffffffffULL;
}  // namespace streams

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t replica,
                                std::uint64_t particle, std::uint64_t purpose) {
    std::uint64_t k = mix64(seed ^ 0x853c49e6748fea9bULL);
    k = mix64(k ^ replica);
    k = mix64(k ^ particle);
    k = mix64(k ^ (purpose * 0xda942042e4dd58b5ULL));
    return k;
}

class Rng {
public:
    explicit Rng(std::uint64_t key) : state_(key) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on (0,1]; never 0, so it is safe inside log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, n), n >= 1. Rejection-free modulo is fine here:
    // n is tiny compared to 2^64, the bias is ~n/2^64.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline Rng make_stream(std::uint64_t seed, std::uint64_t replica,
                       std::uint64_t particle, std::uint64_t purpose) {
    return Rng(stream_key(seed, replica, particle, purpose));
}

}  // namespace herdlab
