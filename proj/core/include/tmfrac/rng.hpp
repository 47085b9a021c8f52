#pragma once

// Counter-based random streams. Every vertex owns a key derived from its
// parent's key and its child slot, so draws do not depend on traversal order
// or on how replicas are spread over workers.

#include <cstdint>
#include <limits>

namespace tmfrac {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_key(std::uint64_t parent, std::uint64_t slot) {
    return mix64(mix64(parent) ^ (slot * kGoldenGamma + 0x632be59bd9b4e019ULL));
}

/// splitmix64 stream started at a key. Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t key) : state_(key) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    /// Uniform double in [0,1) from the top 53 bits.
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace tmfrac
