#pragma once

#include <cstdint>

namespace trajthermo {

/// splitmix64 step: advances the state by the golden-ratio increment and
/// returns the finalized output word.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic per-shot stream: the key is derived from (seed, shot) by
/// two finalization rounds, so disjoint shot ranges can be drawn on
/// different threads and merged into the same counts a serial run produces.
class ShotRng {
public:
    ShotRng(std::uint64_t seed, std::uint64_t shot) {
        state_ = seed ^ (shot * 0xd1b54a32d192ed03ULL);
        splitmix64(state_);
        splitmix64(state_);
    }

    std::uint64_t next() { return splitmix64(state_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

}  // namespace trajthermo
