#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osa/access_analysis.hpp"
#include "osa/policy_engine.hpp"
#include "osa/scenario.hpp"
#include "osa/tracker.hpp"

namespace osa {

struct SeedMetrics {
    std::uint64_t seed = 0;
    double mean_throughput = 0.0; // bits per slot
    double delivered_bits = 0.0;
    CollisionStats collisions;
    std::uint64_t opportunities = 0; // sensed (slot, channel) that were true opportunities
    std::uint64_t overlooked = 0;    // ... and rejected by transmitter-side detection
    std::uint64_t gated = 0;         // transmissions stopped by the policy gate
    ComplianceReport compliance;

    std::optional<double> overlooked_rate() const;
};

struct MetricsReport {
    std::string config_hash;
    std::vector<std::uint64_t> seeds;
    StrategyKind strategy = StrategyKind::myopic;
    DetectorParams detector;
    double zeta = 0.0;
    double transmit_power = 0.0;

    std::vector<SeedMetrics> per_seed;
    std::vector<TrackRecord> records; // seed order

    double mean_throughput = 0.0;
    double throughput_stderr = 0.0;
    CollisionStats collisions; // pooled over seeds
    std::optional<double> overlooked_rate;
    std::uint64_t policy_violations = 0;
    bool constraint_violated = false; // busy-conditional rate above zeta + 3 sigma

    std::uint64_t window = 1;
    std::vector<double> cumulative_series; // seed-averaged
    std::vector<double> windowed_series;   // seed-averaged

    int exit_status() const { return policy_violations > 0 || constraint_violated ? 2 : 0; }
};

/// Full closed loop per seed: sense choice, sensing, access rule, policy gate,
/// bookkeeping, then channel step. Deterministic per (scenario, seed).
MetricsReport run(const Scenario& scenario);

enum class SweepAxis { delta, zeta, snr, horizon };

SweepAxis parse_sweep_axis(const std::string& s);
const char* to_string(SweepAxis a);

/// `lo:hi:step` (inclusive) or a comma list.
std::vector<double> parse_grid(const std::string& spec);

struct SweepRow {
    double value = 0.0;
    DetectorParams detector;
    double mean_throughput = 0.0;
    double throughput_stderr = 0.0;
    std::optional<double> collision_conditional;
    double collision_conditional_stderr = 0.0;
    double collision_unconditional = 0.0;
    std::uint64_t policy_violations = 0;
};

/// One run() per grid point.
std::vector<SweepRow> sweep(const Scenario& scenario, SweepAxis axis, const std::vector<double>& grid);

std::string sweep_csv(SweepAxis axis, const std::vector<SweepRow>& rows);

/// Track record CSV: slot,action,observation,accessed,true_state_bits,reward,
/// collision_flag,belief_0..belief_{N-1},power. State bits are written channel 0 first.
std::string trace_csv(const TrackRecord& record);
TrackRecord parse_trace_csv(const std::string& text);

std::string metrics_csv(const MetricsReport& m);
std::string series_csv(const MetricsReport& m);
std::string summary_text(const MetricsReport& m, const Scenario& scenario);

enum class ReportFormat { csv, summary_text };

/// Writes the artifacts for `format` into dir (created if needed) and returns
/// the paths written. Throws std::runtime_error when dir is not writable.
std::vector<std::string> report(const MetricsReport& m, const Scenario& scenario, const std::string& dir,
                                ReportFormat format);

void write_text_file(const std::string& path, const std::string& contents);

} // namespace osa
