#include "osa/access.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "osa/access_analysis.hpp"

namespace osa {

const char* to_string(CollisionSpace s) {
    return s == CollisionSpace::busy_conditional ? "busy-conditional" : "unconditional";
}

CollisionSpace parse_collision_space(const std::string& s) {
    if (s == "busy-conditional" || s == "conditional") {
        return CollisionSpace::busy_conditional;
    }
    if (s == "unconditional") {
        return CollisionSpace::unconditional;
    }
    throw std::invalid_argument("unknown collision space '" + s + "'");
}

void InterferenceConstraint::validate() const {
    if (!(zeta > 0.0 && zeta < 1.0)) {
        throw std::invalid_argument("zeta must lie in (0,1)");
    }
    if (!(eta > 0.0)) {
        throw std::invalid_argument("eta must be positive");
    }
}

AccessPolicy optimal_access_policy(double delta, double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0)) {
        throw std::invalid_argument("zeta must lie in (0,1)");
    }
    if (delta == 1.0) {
        throw std::invalid_argument(
            "detector uninformative, constraint unsatisfiable with positive idle-throughput guarantee");
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
        throw std::invalid_argument("delta must lie in [0,1)");
    }
    if (delta > zeta) {
        return {zeta / delta, 0.0};
    }
    if (delta < zeta) {
        return {1.0, (zeta - delta) / (1.0 - delta)};
    }
    return {1.0, 0.0};
}

bool decide_access(Observation o, const AccessPolicy& policy, Rng& rng) {
    return bernoulli(rng, policy.transmit_probability(o));
}

std::optional<double> CollisionStats::conditional() const {
    if (busy_slots == 0) {
        return std::nullopt;
    }
    return static_cast<double>(collisions) / static_cast<double>(busy_slots);
}

double CollisionStats::unconditional() const {
    return slots == 0 ? 0.0 : static_cast<double>(collisions) / static_cast<double>(slots);
}

std::optional<double> CollisionStats::rate(CollisionSpace space) const {
    return space == CollisionSpace::busy_conditional ? conditional() : std::optional<double>(unconditional());
}

CollisionStats collision_stats(const TrackRecord& record) {
    CollisionStats s;
    for (const auto& slot : record.slots) {
        ++s.slots;
        const bool busy = ((slot.true_state_bits >> slot.action) & 1U) == 0;
        if (busy) {
            ++s.busy_slots;
            if (slot.accessed) {
                ++s.collisions;
            }
        }
    }
    return s;
}

std::optional<double> collision_rate(const TrackRecord& record, CollisionSpace space) {
    if (record.slots.empty()) {
        throw std::invalid_argument("empty track record");
    }
    return collision_stats(record).rate(space);
}

SensingPolicy build_policy(const ClosedLoopSetup& setup, DetectorParams detector, double zeta) {
    if (setup.strategy.kind == StrategyKind::static_choice && setup.joint) {
        std::vector<double> bw;
        for (const auto& c : setup.chains) {
            bw.push_back(c.bandwidth);
        }
        const auto pi = marginal_idle(setup.joint->stationary(), setup.chains.size());
        return SensingPolicy::make_static(static_choice(pi, bw), setup.chains.size());
    }
    return make_policy(setup.strategy, setup.chains, detector.epsilon, detector.delta, zeta);
}

OccupancyProcess initial_process(const ClosedLoopSetup& setup, Rng& rng) {
    if (setup.initial_state) {
        if (setup.joint) {
            return OccupancyProcess(setup.chains, *setup.joint, *setup.initial_state);
        }
        return OccupancyProcess(setup.chains, *setup.initial_state);
    }
    if (setup.joint) {
        return OccupancyProcess::stationary_start(setup.chains, *setup.joint, rng);
    }
    return OccupancyProcess::stationary_start(setup.chains, rng);
}

std::vector<TrackRecord> run_closed_loop(const ClosedLoopSetup& setup, DetectorParams detector, double zeta,
                                         const TransmissionGate& gate) {
    const SensingPolicy policy = build_policy(setup, detector, zeta);
    const AccessPolicy access = optimal_access_policy(detector.delta, zeta);
    std::vector<TrackRecord> out;
    out.reserve(setup.seeds.size());
    for (const auto seed : setup.seeds) {
        Rng rng(seed);
        out.push_back(run_tracking(initial_process(setup, rng), policy, detector, access, setup.slots, rng, gate));
    }
    return out;
}

std::pair<double, double> throughput_mean_stderr(const std::vector<TrackRecord>& records, int batches) {
    std::vector<double> means;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        const std::size_t n = r.slots.size();
        const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(std::max(batches, 1)), n);
        for (std::size_t k = 0; k < b; ++k) {
            const std::size_t lo = n * k / b;
            const std::size_t hi = n * (k + 1) / b;
            means.push_back(r.mean_reward_between(lo, hi));
        }
        total += r.total_reward();
        count += n;
    }
    if (count == 0) {
        return {0.0, 0.0};
    }
    const double mean = total / static_cast<double>(count);
    if (means.size() < 2) {
        return {mean, 0.0};
    }
    double m = 0.0;
    for (double v : means) {
        m += v;
    }
    m /= static_cast<double>(means.size());
    double ss = 0.0;
    for (double v : means) {
        ss += (v - m) * (v - m);
    }
    const double sd = std::sqrt(ss / static_cast<double>(means.size() - 1));
    return {mean, sd / std::sqrt(static_cast<double>(means.size()))};
}

std::vector<OperatingPointRow> throughput_vs_operating_point(const ClosedLoopSetup& setup, double zeta,
                                                             const RocCurve& roc, const std::vector<double>& deltas) {
    std::vector<OperatingPointRow> rows;
    rows.reserve(deltas.size());
    for (double delta : deltas) {
        const DetectorParams det{roc.epsilon_at(delta), delta};
        const auto records = run_closed_loop(setup, det, zeta);
        OperatingPointRow row;
        row.delta = delta;
        row.epsilon = det.epsilon;
        std::tie(row.mean_throughput, row.throughput_stderr) = throughput_mean_stderr(records);
        CollisionStats total;
        for (const auto& r : records) {
            const auto s = collision_stats(r);
            total.slots += s.slots;
            total.busy_slots += s.busy_slots;
            total.collisions += s.collisions;
        }
        const auto cond = total.conditional();
        row.collision_conditional = cond.value_or(std::numeric_limits<double>::quiet_NaN());
        row.collision_conditional_stderr =
            cond ? std::sqrt(*cond * (1.0 - *cond) / static_cast<double>(total.busy_slots)) : 0.0;
        row.collision_unconditional = total.unconditional();
        rows.push_back(row);
    }
    return rows;
}

} // namespace osa
