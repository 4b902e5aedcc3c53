#pragma once

// Deterministic counter-based random streams.  Every sampling site in the
// library derives an independent stream from (seed, stream_id) so results are
// reproducible bit-for-bit across platforms and across any parallel schedule:
// stdlib distributions are implementation-defined, so the uniform/normal
// mappings are spelled out here.

#include <cmath>
#include <cstdint>

namespace reachguard {

// SplitMix64 step: the standard finalizer with full-period increment.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    Rng() : state_(0x853c49e6748fea9bULL) {}

    // Independent stream: mixes seed and stream id so that nearby ids give
    // uncorrelated sequences.
    Rng(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64(s);
        s = stream_id ^ 0x6a09e667f3bcc909ULL;
        std::uint64_t b = splitmix64(s);
        state_ = a ^ (b + 0x9e3779b97f4a7c15ULL);
        // warm up so that low-entropy (seed, id) pairs decorrelate
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // Uniform in [0, 1): 53 random mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n); n > 0.  Modulo bias is negligible for the
    // n << 2^64 ranges used here, and determinism matters more.
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller (deterministic, no rejection).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

  private:
    std::uint64_t state_;
};

}  // namespace reachguard
