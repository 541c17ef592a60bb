#include "osa/channel_model.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace osa {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

} // namespace

void ChannelChain::validate() const {
    if (!is_probability(p_ii) || !is_probability(p_bi)) {
        throw std::invalid_argument("transition probabilities must lie in [0,1]");
    }
    if (!(bandwidth > 0.0)) {
        throw std::invalid_argument("bandwidth must be positive");
    }
}

StationaryIdle stationary_distribution(const ChannelChain& chain) {
    const double denom = 1.0 - chain.p_ii + chain.p_bi;
    if (denom <= 0.0) {
        throw NoStationaryDistribution();
    }
    StationaryIdle out;
    out.idle = chain.p_bi / denom;
    out.degenerate = chain.p_ii == 0.0 && chain.p_bi == 1.0;
    return out;
}

double predict(double belief_idle, const ChannelChain& chain) {
    return belief_idle * chain.p_ii + (1.0 - belief_idle) * chain.p_bi;
}

std::size_t state_index(const ChannelState& state) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (state[i]) {
            idx |= std::size_t{1} << i;
        }
    }
    return idx;
}

ChannelState state_from_index(std::size_t index, std::size_t num_channels) {
    ChannelState s(num_channels);
    for (std::size_t i = 0; i < num_channels; ++i) {
        s[i] = ((index >> i) & 1U) != 0;
    }
    return s;
}

JointChain::JointChain(std::size_t num_channels, std::vector<double> row_major)
    : num_channels_(num_channels), p_(std::move(row_major)) {
    if (num_channels_ == 0 || num_channels_ > max_channels) {
        throw std::invalid_argument("joint chain supports 1.." + std::to_string(max_channels) + " channels");
    }
    const std::size_t n = num_states();
    if (p_.size() != n * n) {
        throw std::invalid_argument("joint matrix must have " + std::to_string(n * n) + " entries");
    }
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double v = p_[r * n + c];
            if (!is_probability(v)) {
                throw std::invalid_argument("joint matrix entry outside [0,1] in row " + std::to_string(r));
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw std::invalid_argument("joint matrix row " + std::to_string(r) + " sums to " + std::to_string(sum));
        }
    }
}

JointChain JointChain::product(const std::vector<ChannelChain>& chains) {
    const std::size_t n_ch = chains.size();
    if (n_ch == 0 || n_ch > max_channels) {
        throw std::invalid_argument("product chain supports 1.." + std::to_string(max_channels) + " channels");
    }
    const std::size_t n = std::size_t{1} << n_ch;
    std::vector<double> p(n * n, 1.0);
    for (std::size_t from = 0; from < n; ++from) {
        for (std::size_t to = 0; to < n; ++to) {
            double v = 1.0;
            for (std::size_t i = 0; i < n_ch; ++i) {
                const bool idle_now = ((from >> i) & 1U) != 0;
                const bool idle_next = ((to >> i) & 1U) != 0;
                const double p_idle_next = idle_now ? chains[i].p_ii : chains[i].p_bi;
                v *= idle_next ? p_idle_next : 1.0 - p_idle_next;
            }
            p[from * n + to] = v;
        }
    }
    // Rows of a product of stochastic rows sum to one up to rounding.
    for (std::size_t r = 0; r < n; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            sum += p[r * n + c];
        }
        for (std::size_t c = 0; c < n; ++c) {
            p[r * n + c] /= sum;
        }
    }
    return JointChain(n_ch, std::move(p));
}

std::vector<double> JointChain::stationary() const {
    // Solve (P^T - I) pi = 0 with the last equation replaced by sum(pi) = 1.
    const std::size_t n = num_states();
    std::vector<double> a(n * (n + 1), 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return a[r * (n + 1) + c]; };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            at(r, c) = (*this)(c, r) - (r == c ? 1.0 : 0.0);
        }
    }
    for (std::size_t c = 0; c < n; ++c) {
        at(n - 1, c) = 1.0;
    }
    at(n - 1, n) = 1.0;

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(at(r, col)) > std::abs(at(pivot, col))) {
                pivot = r;
            }
        }
        if (std::abs(at(pivot, col)) < 1e-12) {
            throw NoStationaryDistribution();
        }
        if (pivot != col) {
            for (std::size_t c = 0; c <= n; ++c) {
                std::swap(at(pivot, c), at(col, c));
            }
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) {
                continue;
            }
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) {
                continue;
            }
            for (std::size_t c = col; c <= n; ++c) {
                at(r, c) -= f * at(col, c);
            }
        }
    }
    std::vector<double> pi(n);
    for (std::size_t r = 0; r < n; ++r) {
        pi[r] = std::max(0.0, at(r, n) / at(r, r));
    }
    return pi;
}

std::vector<double> JointChain::propagate(const std::vector<double>& dist) const {
    const std::size_t n = num_states();
    std::vector<double> next(n, 0.0);
    for (std::size_t from = 0; from < n; ++from) {
        if (dist[from] == 0.0) {
            continue;
        }
        for (std::size_t to = 0; to < n; ++to) {
            next[to] += dist[from] * (*this)(from, to);
        }
    }
    return next;
}

std::vector<double> marginal_idle(const std::vector<double>& joint_dist, std::size_t num_channels) {
    std::vector<double> m(num_channels, 0.0);
    for (std::size_t s = 0; s < joint_dist.size(); ++s) {
        for (std::size_t i = 0; i < num_channels; ++i) {
            if (((s >> i) & 1U) != 0) {
                m[i] += joint_dist[s];
            }
        }
    }
    return m;
}

OccupancyProcess::OccupancyProcess(std::vector<ChannelChain> chains, ChannelState initial)
    : chains_(std::move(chains)), state_(std::move(initial)) {
    if (chains_.empty()) {
        throw std::invalid_argument("at least one channel is required");
    }
    for (const auto& c : chains_) {
        c.validate();
    }
    if (state_.size() != chains_.size()) {
        throw std::invalid_argument("initial state length must equal the number of channels");
    }
}

OccupancyProcess::OccupancyProcess(std::vector<ChannelChain> chains, JointChain joint, ChannelState initial)
    : OccupancyProcess(std::move(chains), std::move(initial)) {
    if (joint.num_channels() != chains_.size()) {
        throw std::invalid_argument("joint chain dimension does not match channel count");
    }
    joint_ = std::move(joint);
}

OccupancyProcess OccupancyProcess::stationary_start(std::vector<ChannelChain> chains, Rng& rng) {
    ChannelState s(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        s[i] = bernoulli(rng, stationary_distribution(chains[i]).idle);
    }
    return OccupancyProcess(std::move(chains), std::move(s));
}

OccupancyProcess OccupancyProcess::stationary_start(std::vector<ChannelChain> chains, JointChain joint, Rng& rng) {
    const auto pi = joint.stationary();
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t idx = pi.size() - 1;
    for (std::size_t s = 0; s < pi.size(); ++s) {
        acc += pi[s];
        if (u < acc) {
            idx = s;
            break;
        }
    }
    const std::size_t n = chains.size();
    return OccupancyProcess(std::move(chains), std::move(joint), state_from_index(idx, n));
}

void OccupancyProcess::advance(Rng& rng) {
    if (joint_) {
        const std::size_t from = state_index(state_);
        const double u = uniform01(rng);
        double acc = 0.0;
        std::size_t to = joint_->num_states() - 1;
        for (std::size_t s = 0; s < joint_->num_states(); ++s) {
            acc += (*joint_)(from, s);
            if (u < acc) {
                to = s;
                break;
            }
        }
        // Guard against rounding in the cumulative sum landing on a zero-probability tail state.
        while ((*joint_)(from, to) == 0.0 && to > 0) {
            --to;
        }
        state_ = state_from_index(to, chains_.size());
    } else {
        for (std::size_t i = 0; i < chains_.size(); ++i) {
            const double p_idle = state_[i] ? chains_[i].p_ii : chains_[i].p_bi;
            state_[i] = bernoulli(rng, p_idle);
        }
    }
    ++slot_;
}

OccupancyProcess step(OccupancyProcess process, Rng& rng) {
    process.advance(rng);
    return process;
}

std::vector<double> stationary_idle(const OccupancyProcess& process) {
    if (process.joint()) {
        return marginal_idle(process.joint()->stationary(), process.num_channels());
    }
    std::vector<double> out;
    out.reserve(process.num_channels());
    for (const auto& c : process.chains()) {
        out.push_back(stationary_distribution(c).idle);
    }
    return out;
}

} // namespace osa
