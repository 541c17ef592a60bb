#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "osa/geometry.hpp"
#include "osa/tracker.hpp"

namespace osa {

enum class Effect { permit, deny };

/// Axis-aligned rectangle, bounds inclusive.
struct Region {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    bool contains(const Point& p) const {
        return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
    }
};

/// Conjunction of conditions; an absent condition matches anything.
struct RuleMatch {
    std::optional<std::set<int>> bands;
    std::optional<Region> region;
    std::optional<std::pair<std::uint64_t, std::uint64_t>> time; // inclusive slot range
    std::optional<std::set<std::string>> detector_classes;
};

struct RuleCaps {
    std::optional<double> max_power;  // W
    std::optional<int> max_duration;  // slots
    std::optional<std::set<int>> allowed_bands;

    bool empty() const { return !max_power && !max_duration && !allowed_bands; }
};

struct PolicyRule {
    std::string id;
    int priority = 0;
    RuleMatch match;
    Effect effect = Effect::permit;
    RuleCaps caps;
};

struct TransmissionRequest {
    int band = 0;
    double power = 0.0;
    int duration = 1;
    Point location;
    std::uint64_t time = 0;
    std::string detector_class;

    void validate() const;

    /// `band=1 power=0.5 duration=1 x=0 y=0 time=3 class=tier1`
    static TransmissionRequest parse(const std::string& text);
};

bool matches(const PolicyRule& rule, const TransmissionRequest& request);

/// Ordered rules plus the effect applied when nothing matches.
struct PolicySet {
    std::vector<PolicyRule> rules;
    Effect default_effect = Effect::deny;

    void validate() const;

    /// One record per line:
    ///   default deny|permit
    ///   rule id=r1 priority=10 match.band=0,1 match.region=x0,y0,x1,y1
    ///        match.time=lo-hi match.detector_class=a,b effect=permit
    ///        cap.power=1.0 cap.duration=5 cap.bands=0,1
    static PolicySet parse(const std::string& text);
    static PolicySet load(const std::string& path);
};

class AmbiguousPolicy : public std::runtime_error {
public:
    explicit AmbiguousPolicy(const std::string& detail) : std::runtime_error("ambiguous policy: " + detail) {}
};

enum class Verdict { yes, no, yes_with_constraints };

const char* to_string(Verdict v);

struct Decision {
    Verdict verdict = Verdict::no;
    std::vector<std::string> rule_ids; // empty when the default applied
    RuleCaps binding;                  // caps the request must be tightened to
    std::string reason;
};

/// Highest-priority matching rules decide. Equal-priority matches with
/// different effects raise AmbiguousPolicy; equal-priority permits combine
/// their caps (tightest wins). A band outside cap.bands is a hard "no".
Decision evaluate(const PolicySet& policy, const TransmissionRequest& request);

/// The request with power/duration lowered to the decision's binding caps.
TransmissionRequest tighten(const TransmissionRequest& request, const Decision& decision);

std::string format_decision(const Decision& d);

struct PolicyViolation {
    std::uint64_t slot = 0;
    Verdict verdict = Verdict::no;
    std::string detail;
};

struct ComplianceReport {
    std::uint64_t transmissions = 0;
    std::uint64_t hard_denials = 0;   // transmitted although evaluate said no
    std::uint64_t cap_violations = 0; // transmitted above a binding cap
    std::vector<PolicyViolation> violations;

    bool compliant() const { return violations.empty(); }
    int exit_status() const { return compliant() ? 0 : 2; }
};

/// Fields of the replayed requests that the trace does not carry.
struct RequestContext {
    Point location;
    std::string detector_class;
    int duration = 1;
};

/// Replays every transmitted slot through evaluate. power_trace must be
/// aligned with record.slots (std::invalid_argument otherwise).
ComplianceReport check_run(const PolicySet& policy, const TrackRecord& record, const std::vector<double>& power_trace,
                           const RequestContext& context);

} // namespace osa
