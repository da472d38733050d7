#pragma once

#include <cstdint>
#include <random>

namespace auctionlab {

// Deterministic uniform stream used by every sampling routine.
//
// mt19937_64 has a fully specified integer sequence, and the mapping to
// doubles below uses the top 53 bits directly instead of
// std::uniform_real_distribution (whose output is implementation-defined),
// so a given seed produces the same draws on every platform and compiler.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // One uniform draw in (0, 1].  Zero is nudged to 2^-53 so inverse-CDF
    // sampling never evaluates the quantile at probability zero.
    double uniform01() {
        const std::uint64_t bits = engine_() >> 11;
        const double u = static_cast<double>(bits) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    std::uint64_t raw() { return engine_(); }

    // Independent child stream for one Monte Carlo trial.  Trials seeded
    // this way can be evaluated in any order (or in parallel) and still
    // reproduce the same per-trial draws.
    static Rng for_trial(std::uint64_t seed, std::uint64_t trial_index) {
        return Rng(mix(seed ^ mix(trial_index + 1)));
    }

private:
    // splitmix64 finalizer; decorrelates consecutive seeds.
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace auctionlab
