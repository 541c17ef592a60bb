#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osa/access.hpp"
#include "osa/access_analysis.hpp"
#include "osa/channel_model.hpp"
#include "osa/detector.hpp"
#include "osa/geometry.hpp"
#include "osa/policy_engine.hpp"
#include "osa/tracker.hpp"

namespace osa {

enum class DetectorKind { fixed, roc, energy };

struct DetectorConfig {
    DetectorKind kind = DetectorKind::fixed;
    double epsilon = 0.0;
    double delta = 0.0;               // fixed and roc kinds
    std::optional<RocCurve> roc;
    std::optional<EnergyDetectorSpec> energy;
    std::string detector_class = "default";

    /// (epsilon, delta) the sensing layer runs at.
    DetectorParams operating_point() const;
};

struct PolicyConfig {
    std::optional<PolicySet> rules;
    double tx_power = 1.0; // W requested per transmission
};

struct RunConfig {
    std::uint64_t slots = 10000;
    std::vector<std::uint64_t> seeds{1};
    std::uint64_t window = 0; // 0: slots / 20
    std::string output_dir = "osa_out";

    std::uint64_t effective_window() const;
};

/// A complete experiment description. Text format (sections, `key=value` tokens):
///
///   [channels]   channel p_ii=.. p_bi=.. bandwidth=..   (one per channel)
///                joint_row v0 v1 ...                     (optional, 2^N rows)
///                initial state=1,0,1                     (optional, 1 = idle)
///   [detector]   epsilon=.. delta=.. | roc=<file> delta=.. | snr=.. samples=.. threshold=..
///                class=<detector class>
///   [constraint] zeta=.. eta=.. space=busy-conditional|unconditional
///   [strategy]   kind=static|myopic|value_iteration horizon=.. grid=..
///   [topology]   radii r_tx=.. r_rx=.. r_p=.. alpha=..
///                primary id=.. x=.. y=.. channel=.. role=transmit|receive [pattern=1101] [peer=..]
///                secondary id=.. x=.. y=..
///                link tx=.. rx=..
///   [policy]     file=<policy file> power=..
///   [run]        slots=.. seeds=1,2,3 window=.. output=<dir>
struct Scenario {
    std::string source;     // file name used in error messages
    std::string text;       // raw bytes, hashed for reproducibility
    std::vector<ChannelChain> chains;
    std::optional<JointChain> joint;
    std::optional<ChannelState> initial_state;
    std::optional<Topology> topology;
    DetectorConfig detector;
    InterferenceConstraint constraint;
    StrategySpec strategy;
    PolicyConfig policy;
    RunConfig run;

    /// Relative file references resolve against base_dir. Errors are ConfigError
    /// with the offending line.
    static Scenario parse(const std::string& text, const std::string& source = "scenario",
                          const std::string& base_dir = ".");
    static Scenario load(const std::string& path);

    std::string config_hash() const;
    ClosedLoopSetup closed_loop() const;

    /// Transmit power after the topology's power bound, if any.
    double transmit_power() const;
};

} // namespace osa
