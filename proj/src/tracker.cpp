#include "osa/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace osa {

BeliefState BeliefState::product(std::vector<double> idle) {
    for (double p : idle) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("belief probabilities must lie in [0,1]");
        }
    }
    BeliefState b;
    b.per_channel_idle = std::move(idle);
    return b;
}

BeliefState BeliefState::stationary(const std::vector<ChannelChain>& chains) {
    std::vector<double> idle;
    idle.reserve(chains.size());
    for (const auto& c : chains) {
        idle.push_back(stationary_distribution(c).idle);
    }
    return product(std::move(idle));
}

BeliefState BeliefState::from_joint(std::vector<double> joint, std::size_t num_channels) {
    if (joint.size() != (std::size_t{1} << num_channels)) {
        throw std::invalid_argument("joint belief must have 2^N entries");
    }
    double sum = 0.0;
    for (double p : joint) {
        if (p < 0.0) {
            throw std::invalid_argument("joint belief entries must be nonnegative");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("joint belief must sum to 1");
    }
    BeliefState b;
    b.per_channel_idle = marginal_idle(joint, num_channels);
    b.joint = std::move(joint);
    return b;
}

double posterior_idle(double prior_idle, Observation o, double epsilon, double delta) {
    const double idle_lik = o == Observation::idle ? 1.0 - epsilon : epsilon;
    const double busy_lik = o == Observation::idle ? delta : 1.0 - delta;
    const double num = prior_idle * idle_lik;
    const double den = num + (1.0 - prior_idle) * busy_lik;
    if (!(den > 0.0)) {
        throw InconsistentObservation();
    }
    return num / den;
}

BeliefState belief_update(const BeliefState& belief, std::size_t sensed, Observation o, double epsilon, double delta,
                          const std::vector<ChannelChain>& chains) {
    if (belief.num_channels() != chains.size() || sensed >= chains.size()) {
        throw std::invalid_argument("belief/channel dimension mismatch");
    }
    BeliefState next;
    next.per_channel_idle = belief.per_channel_idle;
    next.per_channel_idle[sensed] = posterior_idle(belief.per_channel_idle[sensed], o, epsilon, delta);
    for (std::size_t i = 0; i < chains.size(); ++i) {
        next.per_channel_idle[i] = predict(next.per_channel_idle[i], chains[i]);
    }
    return next;
}

BeliefState joint_belief_update(const BeliefState& belief, std::size_t sensed, Observation o, double epsilon,
                                double delta, const JointChain& chain) {
    if (!belief.joint || belief.joint->size() != chain.num_states() || sensed >= chain.num_channels()) {
        throw std::invalid_argument("joint belief/channel dimension mismatch");
    }
    std::vector<double> corrected(*belief.joint);
    double total = 0.0;
    for (std::size_t s = 0; s < corrected.size(); ++s) {
        const bool idle = ((s >> sensed) & 1U) != 0;
        double lik = 0.0;
        if (o == Observation::idle) {
            lik = idle ? 1.0 - epsilon : delta;
        } else {
            lik = idle ? epsilon : 1.0 - delta;
        }
        corrected[s] *= lik;
        total += corrected[s];
    }
    if (!(total > 0.0)) {
        throw InconsistentObservation();
    }
    for (double& p : corrected) {
        p /= total;
    }
    BeliefState next;
    next.joint = chain.propagate(corrected);
    next.per_channel_idle = marginal_idle(*next.joint, chain.num_channels());
    return next;
}

std::size_t static_choice(const std::vector<double>& stationary_idle, const std::vector<double>& bandwidths) {
    if (stationary_idle.empty() || stationary_idle.size() != bandwidths.size()) {
        throw std::invalid_argument("static_choice needs matching non-empty inputs");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < stationary_idle.size(); ++i) {
        if (bandwidths[i] * stationary_idle[i] > bandwidths[best] * stationary_idle[best]) {
            best = i;
        }
    }
    return best;
}

std::size_t static_choice(const std::vector<ChannelChain>& chains) {
    std::vector<double> pi;
    std::vector<double> bw;
    for (const auto& c : chains) {
        pi.push_back(stationary_distribution(c).idle);
        bw.push_back(c.bandwidth);
    }
    return static_choice(pi, bw);
}

std::size_t myopic_choice(const BeliefState& belief, const std::vector<ChannelChain>& chains) {
    std::vector<double> bw;
    for (const auto& c : chains) {
        bw.push_back(c.bandwidth);
    }
    return static_choice(belief.per_channel_idle, bw);
}

const char* to_string(StrategyKind k) {
    switch (k) {
    case StrategyKind::static_choice:
        return "static";
    case StrategyKind::myopic:
        return "myopic";
    case StrategyKind::value_iteration:
        return "value_iteration";
    }
    return "?";
}

StrategyKind parse_strategy_kind(const std::string& s) {
    if (s == "static") {
        return StrategyKind::static_choice;
    }
    if (s == "myopic") {
        return StrategyKind::myopic;
    }
    if (s == "value_iteration" || s == "pomdp") {
        return StrategyKind::value_iteration;
    }
    throw std::invalid_argument("unknown strategy '" + s + "'");
}

double TrackRecord::total_reward() const {
    double sum = 0.0;
    for (const auto& s : slots) {
        sum += s.reward;
    }
    return sum;
}

double TrackRecord::mean_throughput() const {
    return slots.empty() ? 0.0 : total_reward() / static_cast<double>(slots.size());
}

std::vector<double> TrackRecord::cumulative_throughput() const {
    std::vector<double> out;
    out.reserve(slots.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < slots.size(); ++t) {
        sum += slots[t].reward;
        out.push_back(sum / static_cast<double>(t + 1));
    }
    return out;
}

std::vector<double> TrackRecord::windowed_throughput(std::size_t window) const {
    window = std::max<std::size_t>(window, 1);
    std::vector<double> out;
    out.reserve(slots.size());
    double sum = 0.0;
    for (std::size_t t = 0; t < slots.size(); ++t) {
        sum += slots[t].reward;
        if (t >= window) {
            sum -= slots[t - window].reward;
        }
        out.push_back(sum / static_cast<double>(std::min(window, t + 1)));
    }
    return out;
}

double TrackRecord::mean_reward_between(std::size_t begin, std::size_t end) const {
    end = std::min(end, slots.size());
    if (begin >= end) {
        return 0.0;
    }
    double sum = 0.0;
    for (std::size_t t = begin; t < end; ++t) {
        sum += slots[t].reward;
    }
    return sum / static_cast<double>(end - begin);
}

TrackRecord run_tracking(OccupancyProcess process, const SensingPolicy& policy, DetectorParams detector,
                         const AccessPolicy& access, std::uint64_t slots, Rng& rng, const TransmissionGate& gate) {
    const std::size_t n = process.num_channels();
    const auto& chains = process.chains();
    BeliefState belief;
    if (process.joint()) {
        belief = BeliefState::from_joint(process.joint()->stationary(), n);
    } else {
        belief = BeliefState::stationary(chains);
    }

    TrackRecord record;
    record.num_channels = n;
    record.slots.reserve(slots);
    for (std::uint64_t t = 0; t < slots; ++t) {
        TrackSlot rec;
        rec.slot = t;
        rec.true_state_bits = state_index(process.state());
        rec.belief = belief.per_channel_idle;
        rec.action = policy.choose(belief);
        const bool idle = process.idle(rec.action);
        rec.observation = sense(idle, detector.epsilon, detector.delta, rng);
        rec.wanted_access = decide_access(rec.observation, access, rng);
        rec.accessed = rec.wanted_access;
        if (rec.wanted_access && gate) {
            const GateResult g = gate(t, rec.action);
            rec.accessed = g.allowed;
            rec.power = g.allowed ? g.power : 0.0;
        }
        if (rec.accessed) {
            if (idle) {
                rec.reward = chains[rec.action].bandwidth;
            } else {
                rec.collision = true;
            }
        }

        try {
            belief = process.joint()
                         ? joint_belief_update(belief, rec.action, rec.observation, detector.epsilon, detector.delta,
                                               *process.joint())
                         : belief_update(belief, rec.action, rec.observation, detector.epsilon, detector.delta, chains);
        } catch (const InconsistentObservation&) {
            // The model ruled this outcome out; trust the observation and keep filtering.
            std::vector<double> idle_now = belief.per_channel_idle;
            idle_now[rec.action] = rec.observation == Observation::idle ? 1.0 : 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                idle_now[i] = predict(idle_now[i], chains[i]);
            }
            belief = BeliefState::product(std::move(idle_now));
            if (process.joint()) {
                std::vector<double> joint(std::size_t{1} << n, 1.0);
                for (std::size_t s = 0; s < joint.size(); ++s) {
                    for (std::size_t i = 0; i < n; ++i) {
                        joint[s] *= ((s >> i) & 1U) != 0 ? belief.per_channel_idle[i] : 1.0 - belief.per_channel_idle[i];
                    }
                }
                belief.joint = std::move(joint);
            }
        }
        record.slots.push_back(std::move(rec));
        process.advance(rng);
    }
    return record;
}

TrackRecord run_tracking(const std::vector<ChannelChain>& chains, const SensingPolicy& policy, DetectorParams detector,
                         double zeta, std::uint64_t slots, Rng& rng) {
    return run_tracking(OccupancyProcess::stationary_start(chains, rng), policy, detector,
                        optimal_access_policy(detector.delta, zeta), slots, rng);
}

} // namespace osa
