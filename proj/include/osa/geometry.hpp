#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace osa {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point& a, const Point& b);

enum class PrimaryRole { transmitting, receiving, silent };

/// What a primary node does on one channel. A transmitter is active in slot t
/// when pattern[t % pattern.size()] is set (an empty pattern means always
/// active). A receiver is active exactly when its peer transmitter is.
struct ChannelActivity {
    int channel = 0;
    PrimaryRole role = PrimaryRole::transmitting;
    int peer = -1; // transmitter id, receivers only
    std::vector<bool> pattern;
};

struct PrimaryNode {
    int id = 0;
    Point position;
    std::vector<ChannelActivity> activities;
};

struct SecondaryNode {
    int id = 0;
    Point position;
};

struct SecondaryLink {
    int tx = 0;
    int rx = 0;
};

class UnknownNode : public std::invalid_argument {
public:
    explicit UnknownNode(int id);
};

/// Disk interference model: positions in meters, powers in watts.
struct Topology {
    std::vector<PrimaryNode> primaries;
    std::vector<SecondaryNode> secondaries;
    std::vector<SecondaryLink> links;
    double r_tx = 1.0;  // interference radius of a secondary transmitter
    double r_rx = 1.0;  // vulnerability radius of a secondary receiver
    double r_p = 0.0;   // primary transmission range
    double alpha = 2.0; // path-loss exponent
    double eta = 1.0;   // max interference power at a primary receiver

    /// Checks radii and that every receiving primary has its transmitter within r_p.
    void validate() const;

    const SecondaryNode& secondary(int id) const;
    const PrimaryNode& primary(int id) const;

    PrimaryRole role(const PrimaryNode& node, int channel, std::uint64_t slot) const;
};

/// True when no active primary receiver lies within r_tx of tx and no active
/// primary transmitter lies within r_rx of rx. Distances equal to a radius block.
bool is_opportunity(const Topology& topo, int tx, int rx, int channel, std::uint64_t slot);

/// Transmitter-only detection: no active primary transmitter within r_p + r_tx of tx.
bool conservative_detect(const Topology& topo, int tx, int channel, std::uint64_t slot);

enum class TxSideMode { exact, conservative };

/// RTS-CTS handshake: transmitter-side clearance per mode, then the receiver
/// side (no active primary transmitter within r_rx of rx, certified by RTS reception).
bool rts_cts_opportunity(const Topology& topo, int tx, int rx, int channel, std::uint64_t slot, TxSideMode mode);

/// Power bound eta*d^alpha, or eta*(d - r_p)^alpha when only primary transmitters
/// are detectable (0 when d <= r_p).
double max_power(double eta, double detection_range, double alpha, std::optional<double> r_p = std::nullopt);

} // namespace osa
