#include "osa/geometry.hpp"

#include <cmath>
#include <string>

namespace osa {

double distance(const Point& a, const Point& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

UnknownNode::UnknownNode(int id) : std::invalid_argument("unknown node id " + std::to_string(id)) {}

namespace {

const ChannelActivity* find_activity(const PrimaryNode& node, int channel) {
    for (const auto& a : node.activities) {
        if (a.channel == channel) {
            return &a;
        }
    }
    return nullptr;
}

bool pattern_active(const std::vector<bool>& pattern, std::uint64_t slot) {
    return pattern.empty() || pattern[slot % pattern.size()];
}

bool any_active_within(const Topology& topo, PrimaryRole wanted, const Point& center, double radius,
                       int channel, std::uint64_t slot) {
    for (const auto& p : topo.primaries) {
        if (topo.role(p, channel, slot) == wanted && distance(p.position, center) <= radius) {
            return true;
        }
    }
    return false;
}

} // namespace

void Topology::validate() const {
    if (!(r_tx > 0.0) || !(r_rx > 0.0)) {
        throw std::invalid_argument("r_tx and r_rx must be positive");
    }
    if (!(r_p >= 0.0)) {
        throw std::invalid_argument("R_p must be nonnegative");
    }
    if (!(alpha > 0.0) || !(eta > 0.0)) {
        throw std::invalid_argument("alpha and eta must be positive");
    }
    for (const auto& p : primaries) {
        for (const auto& a : p.activities) {
            if (a.role != PrimaryRole::receiving) {
                continue;
            }
            const PrimaryNode& peer = primary(a.peer);
            const ChannelActivity* pa = find_activity(peer, a.channel);
            if (pa == nullptr || pa->role != PrimaryRole::transmitting) {
                throw std::invalid_argument("primary receiver " + std::to_string(p.id) + " has no transmitting peer on channel " +
                                            std::to_string(a.channel));
            }
            if (distance(p.position, peer.position) > r_p) {
                throw std::invalid_argument("primary receiver " + std::to_string(p.id) + " is farther than R_p from its transmitter");
            }
        }
    }
    for (const auto& l : links) {
        secondary(l.tx);
        secondary(l.rx);
    }
}

const SecondaryNode& Topology::secondary(int id) const {
    for (const auto& s : secondaries) {
        if (s.id == id) {
            return s;
        }
    }
    throw UnknownNode(id);
}

const PrimaryNode& Topology::primary(int id) const {
    for (const auto& p : primaries) {
        if (p.id == id) {
            return p;
        }
    }
    throw UnknownNode(id);
}

PrimaryRole Topology::role(const PrimaryNode& node, int channel, std::uint64_t slot) const {
    const ChannelActivity* a = find_activity(node, channel);
    if (a == nullptr || a->role == PrimaryRole::silent) {
        return PrimaryRole::silent;
    }
    if (a->role == PrimaryRole::transmitting) {
        return pattern_active(a->pattern, slot) ? PrimaryRole::transmitting : PrimaryRole::silent;
    }
    const ChannelActivity* tx = find_activity(primary(a->peer), channel);
    if (tx != nullptr && tx->role == PrimaryRole::transmitting && pattern_active(tx->pattern, slot)) {
        return PrimaryRole::receiving;
    }
    return PrimaryRole::silent;
}

bool is_opportunity(const Topology& topo, int tx, int rx, int channel, std::uint64_t slot) {
    const Point& a = topo.secondary(tx).position;
    const Point& b = topo.secondary(rx).position;
    return !any_active_within(topo, PrimaryRole::receiving, a, topo.r_tx, channel, slot) &&
           !any_active_within(topo, PrimaryRole::transmitting, b, topo.r_rx, channel, slot);
}

bool conservative_detect(const Topology& topo, int tx, int channel, std::uint64_t slot) {
    const Point& a = topo.secondary(tx).position;
    return !any_active_within(topo, PrimaryRole::transmitting, a, topo.r_p + topo.r_tx, channel, slot);
}

bool rts_cts_opportunity(const Topology& topo, int tx, int rx, int channel, std::uint64_t slot, TxSideMode mode) {
    const Point& a = topo.secondary(tx).position;
    const Point& b = topo.secondary(rx).position;
    const bool tx_clear = mode == TxSideMode::exact
                              ? !any_active_within(topo, PrimaryRole::receiving, a, topo.r_tx, channel, slot)
                              : conservative_detect(topo, tx, channel, slot);
    if (!tx_clear) {
        return false;
    }
    // CTS only comes back if the RTS was decodable at rx.
    return !any_active_within(topo, PrimaryRole::transmitting, b, topo.r_rx, channel, slot);
}

double max_power(double eta, double detection_range, double alpha, std::optional<double> r_p) {
    if (!(eta > 0.0) || !(alpha > 0.0)) {
        throw std::invalid_argument("eta and alpha must be positive");
    }
    if (!(detection_range > 0.0)) {
        throw std::invalid_argument("detection range must be positive");
    }
    if (!r_p) {
        return eta * std::pow(detection_range, alpha);
    }
    if (detection_range <= *r_p) {
        return 0.0;
    }
    return eta * std::pow(detection_range - *r_p, alpha);
}

} // namespace osa
