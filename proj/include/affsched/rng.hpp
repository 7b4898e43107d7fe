#pragma once

#include <cmath>
#include <cstdint>

namespace affsched {

// Counter-based PRF generator (splitmix64 finalizer). Each draw hashes
// (key, counter), so streams can be split without coordination and results
// are identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(mix(seed + kGamma) ^ mix(stream * kGamma + 1))) {}

    std::uint64_t next_u64() { return mix(key_ + (++ctr_) * kGamma); }

    // uniform in [0, 1), 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n), unbiased via rejection
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

    // independent child stream; deterministic in (parent key, tag)
    Rng split(std::uint64_t tag) const { return Rng(FromKey{}, mix(key_ ^ mix(tag + kGamma))); }

private:
    struct FromKey {};
    Rng(FromKey, std::uint64_t key) : key_(key) {}

    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

} // namespace affsched
