#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace nephra {

// Deterministic, platform-independent RNG. splitmix64 state advance; substreams
// are derived by hashing (seed, stream id) so per-patient generation is
// order-independent and parallel-safe.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    static Rng substream(uint64_t seed, uint64_t stream, uint64_t phase = 0) {
        Rng r(mix(mix(seed ^ 0x9e3779b97f4a7c15ULL, stream), phase ^ 0xbf58476d1ce4e5b9ULL));
        r.next_u64();
        return r;
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix_out(state_);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [0, n). Rejection-free Lemire reduction is biased below 2^-64,
    // which is fine for cohort shuffling; we still debias with rejection to keep
    // the partition invariant exact for property tests.
    uint64_t bounded(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t threshold = (0 - n) % n;
        for (;;) {
            const uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Standard normal via Box-Muller (always consumes two uniforms, no cached
    // spare, so the draw count per call site is fixed).
    double next_normal() {
        double u1 = next_double();
        const double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = static_cast<size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static uint64_t mix(uint64_t a, uint64_t b) { return mix_out(a + 0x9e3779b97f4a7c15ULL * (b + 1)); }

    static uint64_t mix_out(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace nephra
