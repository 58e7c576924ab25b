#pragma once

#include <cstdint>

namespace modone {

// Counter-based uniform stream: value i is a pure function of (seed, i), so
// parallel draws need no shared state and doubling the sample count with the
// same seed reproduces the first half exactly. The mixer is the standard
// splitmix64 finalizer over seed + (i+1)*golden-gamma.
struct CounterRng {
    std::uint64_t seed = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t bits(std::uint64_t index) const {
        return mix(seed + (index + 1) * 0x9E3779B97F4A7C15ull);
    }

    // uniform in [0, 1), 53 random bits
    double uniform(std::uint64_t index) const {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

    // derived stream for a distinct purpose (sub-experiments, point sets)
    CounterRng substream(std::uint64_t tag) const {
        return CounterRng{mix(seed ^ (tag * 0xD1342543DE82EF95ull + 0x2545F4914F6CDD1Dull))};
    }
};

}
