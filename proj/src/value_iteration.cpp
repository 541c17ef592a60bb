#include <algorithm>
#include <cmath>
#include <string>

#include "osa/tracker.hpp"

namespace osa {

namespace {

constexpr std::size_t max_grid_cells = std::size_t{1} << 22;

std::size_t grid_cells(std::size_t n, int resolution) {
    std::size_t cells = 1;
    for (std::size_t i = 0; i < n; ++i) {
        cells *= static_cast<std::size_t>(resolution);
        if (cells > max_grid_cells) {
            throw std::invalid_argument("belief grid too large: reduce grid resolution or channel count");
        }
    }
    return cells;
}

} // namespace

double ValueTable::interpolate(int stage, const std::vector<double>& belief) const {
    if (stage <= 0) {
        return 0.0;
    }
    const auto& v = values.at(static_cast<std::size_t>(stage));
    const std::size_t n = num_channels;
    const double scale = resolution - 1;
    std::size_t base = 0;
    std::size_t stride = 1;
    std::vector<std::size_t> strides(n);
    std::vector<double> frac(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pos = std::clamp(belief[i], 0.0, 1.0) * scale;
        const int k0 = std::min(static_cast<int>(pos), resolution - 2);
        frac[i] = pos - k0;
        base += static_cast<std::size_t>(k0) * stride;
        strides[i] = stride;
        stride *= static_cast<std::size_t>(resolution);
    }
    double out = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << n); ++corner) {
        double w = 1.0;
        std::size_t idx = base;
        for (std::size_t i = 0; i < n; ++i) {
            if (((corner >> i) & 1U) != 0) {
                w *= frac[i];
                idx += strides[i];
            } else {
                w *= 1.0 - frac[i];
            }
        }
        if (w != 0.0) {
            out += w * v[idx];
        }
    }
    return out;
}

SensingPolicy SensingPolicy::make_static(std::size_t channel, std::size_t num_channels) {
    if (channel >= num_channels) {
        throw std::invalid_argument("static channel out of range");
    }
    SensingPolicy p;
    p.kind_ = StrategyKind::static_choice;
    p.static_channel_ = channel;
    p.num_channels_ = num_channels;
    return p;
}

SensingPolicy SensingPolicy::make_myopic(std::vector<double> bandwidths) {
    SensingPolicy p;
    p.kind_ = StrategyKind::myopic;
    p.num_channels_ = bandwidths.size();
    p.bandwidths_ = std::move(bandwidths);
    return p;
}

double expected_slot_reward(double p_idle, double bandwidth, double epsilon, const AccessPolicy& access) {
    return bandwidth * p_idle *
           ((1.0 - epsilon) * access.p_tx_given_idle_obs + epsilon * access.p_tx_given_busy_obs);
}

double SensingPolicy::q_value(const std::vector<double>& belief, std::size_t action, int stage) const {
    const double p = belief[action];
    double q = expected_slot_reward(p, chains_[action].bandwidth, epsilon_, access_);
    if (stage <= 1) {
        return q;
    }
    std::vector<double> next(belief.size());
    for (const Observation o : {Observation::idle, Observation::busy}) {
        const double p_obs = o == Observation::idle ? p * (1.0 - epsilon_) + (1.0 - p) * delta_
                                                    : p * epsilon_ + (1.0 - p) * (1.0 - delta_);
        if (p_obs <= 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < belief.size(); ++i) {
            const double prior = i == action ? posterior_idle(p, o, epsilon_, delta_) : belief[i];
            next[i] = predict(prior, chains_[i]);
        }
        q += p_obs * table_->interpolate(stage - 1, next);
    }
    return q;
}

std::size_t SensingPolicy::choose(const BeliefState& belief, int steps_to_go) const {
    switch (kind_) {
    case StrategyKind::static_choice:
        return static_channel_;
    case StrategyKind::myopic:
        return static_choice(belief.per_channel_idle, bandwidths_);
    case StrategyKind::value_iteration:
        break;
    }
    const int stage = std::clamp(steps_to_go, 1, horizon_);
    std::size_t best = 0;
    double best_q = q_value(belief.per_channel_idle, 0, stage);
    for (std::size_t a = 1; a < num_channels_; ++a) {
        const double q = q_value(belief.per_channel_idle, a, stage);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
    }
    return best;
}

double SensingPolicy::value(const BeliefState& belief, int steps_to_go) const {
    if (kind_ != StrategyKind::value_iteration) {
        throw std::logic_error("value() is only defined for value-iteration policies");
    }
    const int stage = std::clamp(steps_to_go, 1, horizon_);
    double best = q_value(belief.per_channel_idle, 0, stage);
    for (std::size_t a = 1; a < num_channels_; ++a) {
        best = std::max(best, q_value(belief.per_channel_idle, a, stage));
    }
    return best;
}

SensingPolicy value_iteration(const std::vector<ChannelChain>& chains, double epsilon, double delta, double zeta,
                              int horizon, int grid_resolution) {
    if (grid_resolution < 2) {
        throw std::invalid_argument("belief grid resolution must be at least 2");
    }
    if (horizon < 1) {
        throw std::invalid_argument("horizon must be at least 1");
    }
    if (chains.empty() || chains.size() > 255) {
        throw std::invalid_argument("value iteration needs 1..255 channels");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("epsilon must lie in [0,1]");
    }
    for (const auto& c : chains) {
        c.validate();
    }
    const std::size_t n = chains.size();
    const std::size_t cells = grid_cells(n, grid_resolution);

    SensingPolicy p;
    p.kind_ = StrategyKind::value_iteration;
    p.horizon_ = horizon;
    p.num_channels_ = n;
    p.chains_ = chains;
    p.epsilon_ = epsilon;
    p.delta_ = delta;
    p.access_ = optimal_access_policy(delta, zeta);
    for (const auto& c : chains) {
        p.bandwidths_.push_back(c.bandwidth);
    }

    ValueTable table;
    table.num_channels = n;
    table.resolution = grid_resolution;
    table.values.assign(static_cast<std::size_t>(horizon) + 1, std::vector<double>(cells, 0.0));
    table.actions.assign(static_cast<std::size_t>(horizon) + 1, std::vector<std::uint8_t>(cells, 0));
    p.table_ = std::move(table);

    const double scale = grid_resolution - 1;
    std::vector<double> belief(n);
    for (int h = 1; h <= horizon; ++h) {
        auto& values = p.table_->values[static_cast<std::size_t>(h)];
        auto& actions = p.table_->actions[static_cast<std::size_t>(h)];
        for (std::size_t cell = 0; cell < cells; ++cell) {
            std::size_t rem = cell;
            for (std::size_t i = 0; i < n; ++i) {
                belief[i] = static_cast<double>(rem % static_cast<std::size_t>(grid_resolution)) / scale;
                rem /= static_cast<std::size_t>(grid_resolution);
            }
            std::size_t best = 0;
            double best_q = p.q_value(belief, 0, h);
            for (std::size_t a = 1; a < n; ++a) {
                const double q = p.q_value(belief, a, h);
                if (q > best_q) {
                    best_q = q;
                    best = a;
                }
            }
            values[cell] = best_q;
            actions[cell] = static_cast<std::uint8_t>(best);
        }
    }
    return p;
}

SensingPolicy make_policy(const StrategySpec& spec, const std::vector<ChannelChain>& chains, double epsilon,
                          double delta, double zeta) {
    switch (spec.kind) {
    case StrategyKind::static_choice:
        return SensingPolicy::make_static(static_choice(chains), chains.size());
    case StrategyKind::myopic: {
        std::vector<double> bw;
        for (const auto& c : chains) {
            bw.push_back(c.bandwidth);
        }
        return SensingPolicy::make_myopic(std::move(bw));
    }
    case StrategyKind::value_iteration:
        return value_iteration(chains, epsilon, delta, zeta, spec.horizon, spec.grid_resolution);
    }
    throw std::logic_error("unreachable");
}

namespace {

double evaluate_recursive(const SensingPolicy& policy, const std::vector<double>& belief,
                          const std::vector<ChannelChain>& chains, double epsilon, double delta,
                          const AccessPolicy& access, int steps_to_go) {
    if (steps_to_go == 0) {
        return 0.0;
    }
    BeliefState b;
    b.per_channel_idle = belief;
    const std::size_t a = policy.choose(b, steps_to_go);
    const double p = belief[a];
    double v = expected_slot_reward(p, chains[a].bandwidth, epsilon, access);
    for (const Observation o : {Observation::idle, Observation::busy}) {
        const double p_obs = o == Observation::idle ? p * (1.0 - epsilon) + (1.0 - p) * delta
                                                    : p * epsilon + (1.0 - p) * (1.0 - delta);
        if (p_obs <= 0.0) {
            continue;
        }
        const BeliefState next = belief_update(b, a, o, epsilon, delta, chains);
        v += p_obs * evaluate_recursive(policy, next.per_channel_idle, chains, epsilon, delta, access, steps_to_go - 1);
    }
    return v;
}

} // namespace

double evaluate_policy_exact(const SensingPolicy& policy, const BeliefState& initial,
                             const std::vector<ChannelChain>& chains, double epsilon, double delta, double zeta,
                             int horizon) {
    if (horizon < 0) {
        throw std::invalid_argument("horizon must be nonnegative");
    }
    return evaluate_recursive(policy, initial.per_channel_idle, chains, epsilon, delta,
                              optimal_access_policy(delta, zeta), horizon);
}

} // namespace osa
