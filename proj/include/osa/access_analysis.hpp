#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "osa/access.hpp"
#include "osa/detector.hpp"
#include "osa/tracker.hpp"

namespace osa {

struct CollisionStats {
    std::uint64_t slots = 0;
    std::uint64_t busy_slots = 0; // sensed channel truly busy
    std::uint64_t collisions = 0; // transmitted on a busy channel

    /// Undefined (nullopt) when no sensed channel was ever busy.
    std::optional<double> conditional() const;
    double unconditional() const;
    std::optional<double> rate(CollisionSpace space) const;
};

CollisionStats collision_stats(const TrackRecord& record);

/// Throws std::invalid_argument for an empty record.
std::optional<double> collision_rate(const TrackRecord& record, CollisionSpace space);

/// Closed-loop setup shared by sweeps: channels, sensing strategy, run length.
struct ClosedLoopSetup {
    std::vector<ChannelChain> chains;
    std::optional<JointChain> joint;
    std::optional<ChannelState> initial_state;
    StrategySpec strategy;
    std::uint64_t slots = 10000;
    std::vector<std::uint64_t> seeds{1};
};

/// Sensing policy for the setup at a detector operating point.
SensingPolicy build_policy(const ClosedLoopSetup& setup, DetectorParams detector, double zeta);

/// Starting occupancy for one replication (stationary draw unless fixed).
OccupancyProcess initial_process(const ClosedLoopSetup& setup, Rng& rng);

/// Runs the closed loop once per seed with the optimal access rule for
/// (delta, zeta). Records come back in seed order.
std::vector<TrackRecord> run_closed_loop(const ClosedLoopSetup& setup, DetectorParams detector, double zeta,
                                         const TransmissionGate& gate = {});

struct OperatingPointRow {
    double delta = 0.0;
    double epsilon = 0.0;
    double mean_throughput = 0.0;
    double throughput_stderr = 0.0;
    double collision_conditional = 0.0; // NaN when undefined
    double collision_conditional_stderr = 0.0;
    double collision_unconditional = 0.0;
};

/// Mean and batch-means standard error of per-slot reward over all records.
std::pair<double, double> throughput_mean_stderr(const std::vector<TrackRecord>& records, int batches = 20);

/// For each delta (epsilon read off the ROC), runs the loop with the optimal
/// access rule and tabulates throughput and collision rates.
std::vector<OperatingPointRow> throughput_vs_operating_point(const ClosedLoopSetup& setup, double zeta,
                                                             const RocCurve& roc, const std::vector<double>& deltas);

} // namespace osa
