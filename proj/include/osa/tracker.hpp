#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "osa/access.hpp"
#include "osa/channel_model.hpp"
#include "osa/detector.hpp"

namespace osa {

class InconsistentObservation : public std::runtime_error {
public:
    InconsistentObservation() : std::runtime_error("inconsistent observation") {}
};

/// POMDP information state. per_channel_idle is always populated; joint is
/// kept only when filtering the exact 2^N distribution.
struct BeliefState {
    std::vector<double> per_channel_idle;
    std::optional<std::vector<double>> joint;

    std::size_t num_channels() const { return per_channel_idle.size(); }

    static BeliefState product(std::vector<double> idle);
    static BeliefState stationary(const std::vector<ChannelChain>& chains);
    static BeliefState from_joint(std::vector<double> joint, std::size_t num_channels);
};

/// Bayes correction of P(idle) for one sensing outcome.
double posterior_idle(double prior_idle, Observation o, double epsilon, double delta);

/// Product-form filter: correct the sensed channel, then predict every channel
/// one slot ahead. Throws InconsistentObservation on a zero-probability outcome.
BeliefState belief_update(const BeliefState& belief, std::size_t sensed, Observation o, double epsilon, double delta,
                          const std::vector<ChannelChain>& chains);

/// Exact filter over the 2^N joint distribution (belief.joint must be set).
BeliefState joint_belief_update(const BeliefState& belief, std::size_t sensed, Observation o, double epsilon,
                                double delta, const JointChain& chain);

std::size_t static_choice(const std::vector<ChannelChain>& chains);
std::size_t static_choice(const std::vector<double>& stationary_idle, const std::vector<double>& bandwidths);
std::size_t myopic_choice(const BeliefState& belief, const std::vector<ChannelChain>& chains);

enum class StrategyKind { static_choice, myopic, value_iteration };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy_kind(const std::string& s);

struct StrategySpec {
    StrategyKind kind = StrategyKind::myopic;
    int horizon = 1;
    int grid_resolution = 33;
};

/// Per-stage value tables on a uniform grid over [0,1]^N.
struct ValueTable {
    std::size_t num_channels = 0;
    int resolution = 0;
    // stages[h][cell] for h = 0..horizon; stage 0 is identically zero.
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::uint8_t>> actions;

    double interpolate(int stage, const std::vector<double>& belief) const;
};

class SensingPolicy {
public:
    static SensingPolicy make_static(std::size_t channel, std::size_t num_channels);
    static SensingPolicy make_myopic(std::vector<double> bandwidths);

    StrategyKind kind() const { return kind_; }
    int horizon() const { return horizon_; }
    const ValueTable* table() const { return table_ ? &*table_ : nullptr; }

    /// Channel to sense with `steps_to_go` slots left; value-iteration policies
    /// clamp it to their horizon (receding horizon in long runs).
    std::size_t choose(const BeliefState& belief, int steps_to_go) const;
    std::size_t choose(const BeliefState& belief) const { return choose(belief, horizon_); }

    /// Interpolated optimal value with `steps_to_go` slots left.
    double value(const BeliefState& belief, int steps_to_go) const;

private:
    friend SensingPolicy value_iteration(const std::vector<ChannelChain>&, double, double, double, int, int);

    StrategyKind kind_ = StrategyKind::myopic;
    int horizon_ = 1;
    std::size_t static_channel_ = 0;
    std::size_t num_channels_ = 0;
    std::vector<double> bandwidths_;
    // Value-iteration model.
    std::vector<ChannelChain> chains_;
    double epsilon_ = 0.0;
    double delta_ = 0.0;
    AccessPolicy access_;
    std::optional<ValueTable> table_;

    double q_value(const std::vector<double>& belief, std::size_t action, int stage) const;
};

/// Finite-horizon grid value iteration over the product belief space with the
/// access rule fixed to optimal_access_policy(delta, zeta).
SensingPolicy value_iteration(const std::vector<ChannelChain>& chains, double epsilon, double delta, double zeta,
                              int horizon, int grid_resolution = 33);

SensingPolicy make_policy(const StrategySpec& spec, const std::vector<ChannelChain>& chains, double epsilon,
                          double delta, double zeta);

/// Expected reward of sensing `action` in a slot with prior idle probability p.
double expected_slot_reward(double p_idle, double bandwidth, double epsilon, const AccessPolicy& access);

/// Exact expected total reward of following `policy` for `horizon` slots from
/// `initial`, by recursion over the observation tree (product chains).
double evaluate_policy_exact(const SensingPolicy& policy, const BeliefState& initial,
                             const std::vector<ChannelChain>& chains, double epsilon, double delta, double zeta,
                             int horizon);

struct TrackSlot {
    std::uint64_t slot = 0;
    std::size_t action = 0;
    Observation observation = Observation::busy;
    bool wanted_access = false; // access rule said transmit
    bool accessed = false;      // actually transmitted (after any gate)
    std::uint64_t true_state_bits = 0;
    double reward = 0.0;
    bool collision = false;
    double power = 0.0;
    std::vector<double> belief; // prior idle probabilities used for the decision
};

struct TrackRecord {
    std::size_t num_channels = 0;
    std::vector<TrackSlot> slots;

    double total_reward() const;
    double mean_throughput() const;
    std::vector<double> cumulative_throughput() const;
    /// Trailing-window mean reward; the first window-1 entries average what is available.
    std::vector<double> windowed_throughput(std::size_t window) const;
    double mean_reward_between(std::size_t begin, std::size_t end) const;
};

struct DetectorParams {
    double epsilon = 0.0;
    double delta = 0.0;
};

struct GateResult {
    bool allowed = true;
    double power = 0.0;
};

/// Called for each slot in which the access rule wants to transmit.
using TransmissionGate = std::function<GateResult(std::uint64_t slot, std::size_t channel)>;

/// Closed loop sense -> access -> reward. Per slot the stream is consumed in a
/// fixed order (sense, access, channel step) so runs that differ only in
/// detector/access parameters share their random numbers.
TrackRecord run_tracking(OccupancyProcess process, const SensingPolicy& policy, DetectorParams detector,
                         const AccessPolicy& access, std::uint64_t slots, Rng& rng, const TransmissionGate& gate = {});

/// Convenience form: stationary start and the optimal access rule for (delta, zeta).
TrackRecord run_tracking(const std::vector<ChannelChain>& chains, const SensingPolicy& policy, DetectorParams detector,
                         double zeta, std::uint64_t slots, Rng& rng);

} // namespace osa
