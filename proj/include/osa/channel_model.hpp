#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "osa/rng.hpp"

namespace osa {

/// Two-state (idle/busy) Markov chain for one primary channel.
struct ChannelChain {
    double p_ii = 1.0; // idle -> idle
    double p_bi = 0.0; // busy -> idle
    double bandwidth = 1.0; // reward per slot when the channel is used successfully

    void validate() const;

    double p_ib() const { return 1.0 - p_ii; }
    double p_bb() const { return 1.0 - p_bi; }
};

struct StationaryIdle {
    double idle = 0.0;
    // Set for the periodic chain (p_ii=0, p_bi=1): the value is a time average only.
    bool degenerate = false;
};

class NoStationaryDistribution : public std::runtime_error {
public:
    NoStationaryDistribution() : std::runtime_error("no unique stationary distribution") {}
};

StationaryIdle stationary_distribution(const ChannelChain& chain);

/// One-slot prediction of P(idle) given the current P(idle).
double predict(double belief_idle, const ChannelChain& chain);

/// Channel occupancy; element i is true when channel i is idle.
using ChannelState = std::vector<bool>;

std::size_t state_index(const ChannelState& state);
ChannelState state_from_index(std::size_t index, std::size_t num_channels);

/// Explicit row-stochastic 2^N x 2^N chain over joint occupancy states.
/// Bit i of a state index is set when channel i is idle.
class JointChain {
public:
    static constexpr std::size_t max_channels = 8;

    JointChain(std::size_t num_channels, std::vector<double> row_major);

    /// Product chain built from independent per-channel chains.
    static JointChain product(const std::vector<ChannelChain>& chains);

    std::size_t num_channels() const { return num_channels_; }
    std::size_t num_states() const { return std::size_t{1} << num_channels_; }
    double operator()(std::size_t from, std::size_t to) const { return p_[from * num_states() + to]; }

    /// Solves pi P = pi; throws NoStationaryDistribution when pi is not unique.
    std::vector<double> stationary() const;

    /// Distribution after one slot.
    std::vector<double> propagate(const std::vector<double>& dist) const;

private:
    std::size_t num_channels_;
    std::vector<double> p_;
};

std::vector<double> marginal_idle(const std::vector<double>& joint_dist, std::size_t num_channels);

/// Ground-truth occupancy of N primary channels.
class OccupancyProcess {
public:
    OccupancyProcess(std::vector<ChannelChain> chains, ChannelState initial);
    OccupancyProcess(std::vector<ChannelChain> chains, JointChain joint, ChannelState initial);

    /// Initial state drawn from the stationary distribution.
    static OccupancyProcess stationary_start(std::vector<ChannelChain> chains, Rng& rng);
    static OccupancyProcess stationary_start(std::vector<ChannelChain> chains, JointChain joint, Rng& rng);

    /// Advances one slot. Product mode consumes exactly N draws, joint mode one.
    void advance(Rng& rng);

    std::size_t num_channels() const { return chains_.size(); }
    const std::vector<ChannelChain>& chains() const { return chains_; }
    const std::optional<JointChain>& joint() const { return joint_; }
    const ChannelState& state() const { return state_; }
    bool idle(std::size_t channel) const { return state_.at(channel); }
    std::uint64_t slot_index() const { return slot_; }

private:
    std::vector<ChannelChain> chains_;
    std::optional<JointChain> joint_;
    ChannelState state_;
    std::uint64_t slot_ = 0;
};

/// Value-returning form of OccupancyProcess::advance.
OccupancyProcess step(OccupancyProcess process, Rng& rng);

/// Stationary P(idle) per channel, using the joint chain when one is attached.
std::vector<double> stationary_idle(const OccupancyProcess& process);

} // namespace osa
