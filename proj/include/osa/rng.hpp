#pragma once

#include <cstdint>
#include <random>

namespace osa {

// Every stochastic operation takes an explicit stream. Draws go through
// uniform01() so that trajectories do not depend on the standard library's
// distribution implementations.
using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    return uniform01(rng) < p;
}

} // namespace osa
