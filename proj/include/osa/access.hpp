#pragma once

#include <string>

#include "osa/detector.hpp"
#include "osa/rng.hpp"

namespace osa {

enum class CollisionSpace {
    busy_conditional, // collisions / slots whose sensed channel was busy
    unconditional,    // collisions / all slots
};

const char* to_string(CollisionSpace s);
CollisionSpace parse_collision_space(const std::string& s);

struct InterferenceConstraint {
    double eta = 1.0;  // W, enforced through the geometry power bound
    double zeta = 0.1; // max collision probability
    CollisionSpace collision_space = CollisionSpace::busy_conditional;

    void validate() const;
};

/// Transmission probabilities conditioned on the sensing outcome.
struct AccessPolicy {
    double p_tx_given_idle_obs = 1.0;
    double p_tx_given_busy_obs = 0.0;

    double transmit_probability(Observation o) const {
        return o == Observation::idle ? p_tx_given_idle_obs : p_tx_given_busy_obs;
    }
};

/// Randomized access that meets the collision cap exactly:
///   delta > zeta: transmit on "idle" w.p. zeta/delta, never on "busy";
///   delta < zeta: always on "idle", on "busy" w.p. (zeta-delta)/(1-delta);
///   delta == zeta: trust the detector.
/// Throws std::invalid_argument for delta outside [0,1) or zeta outside (0,1).
AccessPolicy optimal_access_policy(double delta, double zeta);

/// Bernoulli draw for the observation; consumes exactly one draw.
bool decide_access(Observation o, const AccessPolicy& policy, Rng& rng);

} // namespace osa
