#include "osa/scenario.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "osa/text_util.hpp"

namespace osa {

namespace {

using Fields = std::map<std::string, std::pair<std::string, int>>;

PrimaryRole parse_role(const std::string& s) {
    if (s == "transmit" || s == "transmitting" || s == "tx") {
        return PrimaryRole::transmitting;
    }
    if (s == "receive" || s == "receiving" || s == "rx") {
        return PrimaryRole::receiving;
    }
    if (s == "silent") {
        return PrimaryRole::silent;
    }
    throw std::invalid_argument("role must be transmit, receive or silent");
}

std::vector<bool> parse_pattern(const std::string& s) {
    std::vector<bool> out;
    for (char c : s) {
        if (c != '0' && c != '1') {
            throw std::invalid_argument("pattern must be a string of 0/1");
        }
        out.push_back(c == '1');
    }
    return out;
}

void check_known(const KeyValueLine& kv, std::initializer_list<const char*> keys) {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : kv.values) {
        if (known.count(k) == 0) {
            throw std::invalid_argument("unknown field '" + k + "'");
        }
    }
}

std::string resolve(const std::string& base_dir, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_absolute()) {
        return p.string();
    }
    return (std::filesystem::path(base_dir) / p).string();
}

} // namespace

DetectorParams DetectorConfig::operating_point() const {
    switch (kind) {
    case DetectorKind::fixed:
        return {epsilon, delta};
    case DetectorKind::roc:
        return {roc->epsilon_at(delta), delta};
    case DetectorKind::energy: {
        const auto p = energy_operating_point(*energy);
        return {p.epsilon, p.delta};
    }
    }
    return {};
}

std::uint64_t RunConfig::effective_window() const {
    if (window > 0) {
        return window;
    }
    return std::max<std::uint64_t>(1, slots / 20);
}

Scenario Scenario::parse(const std::string& text, const std::string& source, const std::string& base_dir) {
    Scenario sc;
    sc.source = source;
    sc.text = text;

    // Section-scoped key=value fields remember their line for later validation.
    std::map<std::string, Fields> sections;
    std::vector<std::vector<double>> joint_rows;
    int joint_line = 0;
    int channels_line = 0;
    int initial_line = 0;
    std::map<int, PrimaryNode> primaries;
    std::vector<int> primary_order;
    bool have_radii = false;
    int topology_line = 0;

    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    auto fail = [&](int line, const std::string& msg) -> ConfigError { return ConfigError(source, line, msg); };

    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip_comment(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw fail(line_no, "malformed section header");
            }
            section = trim(line.substr(1, line.size() - 2));
            static const std::set<std::string> known = {"channels", "detector", "constraint", "strategy",
                                                        "topology", "policy",   "run"};
            if (known.count(section) == 0) {
                throw fail(line_no, "unknown section [" + section + "]");
            }
            if (section == "topology") {
                topology_line = line_no;
            }
            continue;
        }
        if (section.empty()) {
            throw fail(line_no, "content before the first section");
        }
        try {
            if (section == "channels") {
                channels_line = channels_line == 0 ? line_no : channels_line;
                const std::string first = line.substr(0, line.find_first_of(" \t"));
                if (first == "joint_row") {
                    std::istringstream ls(line.substr(first.size()));
                    std::vector<double> row;
                    for (std::string t; ls >> t;) {
                        row.push_back(parse_double(t));
                    }
                    joint_rows.push_back(std::move(row));
                    joint_line = joint_line == 0 ? line_no : joint_line;
                    continue;
                }
                const auto kv = parse_key_values(line);
                if (kv.keyword == "channel") {
                    check_known(kv, {"p_ii", "p_bi", "bandwidth"});
                    ChannelChain c;
                    c.p_ii = parse_double(kv.require("p_ii"));
                    c.p_bi = parse_double(kv.require("p_bi"));
                    c.bandwidth = kv.has("bandwidth") ? parse_double(kv.require("bandwidth")) : 1.0;
                    c.validate();
                    sc.chains.push_back(c);
                } else if (kv.keyword == "initial") {
                    check_known(kv, {"state"});
                    ChannelState s;
                    for (int v : parse_int_list(kv.require("state"))) {
                        if (v != 0 && v != 1) {
                            throw std::invalid_argument("initial state entries must be 0 or 1");
                        }
                        s.push_back(v == 1);
                    }
                    sc.initial_state = std::move(s);
                    initial_line = line_no;
                } else {
                    throw std::invalid_argument("expected 'channel', 'joint_row' or 'initial'");
                }
                continue;
            }
            if (section == "topology") {
                const auto kv = parse_key_values(line);
                if (!sc.topology) {
                    sc.topology = Topology{};
                }
                auto& topo = *sc.topology;
                if (kv.keyword == "radii") {
                    check_known(kv, {"r_tx", "r_rx", "r_p", "alpha"});
                    topo.r_tx = parse_double(kv.require("r_tx"));
                    topo.r_rx = parse_double(kv.require("r_rx"));
                    topo.r_p = parse_double(kv.require("r_p"));
                    topo.alpha = kv.has("alpha") ? parse_double(kv.require("alpha")) : 2.0;
                    have_radii = true;
                } else if (kv.keyword == "primary") {
                    check_known(kv, {"id", "x", "y", "channel", "role", "pattern", "peer"});
                    const int id = static_cast<int>(parse_int(kv.require("id")));
                    const Point pos{parse_double(kv.require("x")), parse_double(kv.require("y"))};
                    auto it = primaries.find(id);
                    if (it == primaries.end()) {
                        it = primaries.emplace(id, PrimaryNode{id, pos, {}}).first;
                        primary_order.push_back(id);
                    } else if (it->second.position.x != pos.x || it->second.position.y != pos.y) {
                        throw std::invalid_argument("primary " + std::to_string(id) + " redeclared at another position");
                    }
                    ChannelActivity a;
                    a.channel = static_cast<int>(parse_int(kv.require("channel")));
                    a.role = parse_role(kv.require("role"));
                    if (auto p = kv.get("pattern")) {
                        a.pattern = parse_pattern(*p);
                    }
                    if (a.role == PrimaryRole::receiving) {
                        a.peer = static_cast<int>(parse_int(kv.require("peer")));
                    }
                    it->second.activities.push_back(std::move(a));
                } else if (kv.keyword == "secondary") {
                    check_known(kv, {"id", "x", "y"});
                    topo.secondaries.push_back({static_cast<int>(parse_int(kv.require("id"))),
                                                {parse_double(kv.require("x")), parse_double(kv.require("y"))}});
                } else if (kv.keyword == "link") {
                    check_known(kv, {"tx", "rx"});
                    topo.links.push_back(
                        {static_cast<int>(parse_int(kv.require("tx"))), static_cast<int>(parse_int(kv.require("rx")))});
                } else {
                    throw std::invalid_argument("expected 'radii', 'primary', 'secondary' or 'link'");
                }
                continue;
            }
            const auto kv = parse_key_values(line);
            if (!kv.keyword.empty() || !kv.positional.empty()) {
                throw std::invalid_argument("expected key=value fields");
            }
            for (const auto& [k, v] : kv.values) {
                auto& fields = sections[section];
                if (fields.count(k) != 0) {
                    throw std::invalid_argument("duplicate field '" + k + "'");
                }
                fields[k] = {v, line_no};
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw fail(line_no, e.what());
        }
    }

    if (sc.chains.empty()) {
        throw fail(channels_line, "scenario declares no channels");
    }
    const std::size_t n = sc.chains.size();
    if (!joint_rows.empty()) {
        std::vector<double> flat;
        for (const auto& r : joint_rows) {
            flat.insert(flat.end(), r.begin(), r.end());
        }
        try {
            sc.joint = JointChain(n, std::move(flat));
        } catch (const std::invalid_argument& e) {
            throw fail(joint_line, e.what());
        }
    }
    if (sc.initial_state && sc.initial_state->size() != n) {
        throw fail(initial_line, "initial state length does not match channel count");
    }

    // Pull a typed field out of a section, reporting its own line on failure.
    auto field = [&](const std::string& sec, const std::string& key) -> std::optional<std::pair<std::string, int>> {
        auto s = sections.find(sec);
        if (s == sections.end()) {
            return std::nullopt;
        }
        auto f = s->second.find(key);
        if (f == s->second.end()) {
            return std::nullopt;
        }
        return f->second;
    };
    auto allowed = [&](const std::string& sec, std::initializer_list<const char*> keys) {
        std::set<std::string> known(keys.begin(), keys.end());
        for (const auto& [k, v] : sections[sec]) {
            if (known.count(k) == 0) {
                throw fail(v.second, "unknown field '" + k + "' in [" + sec + "]");
            }
        }
    };
    auto number = [&](const std::string& sec, const std::string& key, double fallback) {
        auto f = field(sec, key);
        if (!f) {
            return fallback;
        }
        try {
            return parse_double(f->first);
        } catch (const std::exception& e) {
            throw fail(f->second, key + ": " + e.what());
        }
    };
    auto line_of = [&](const std::string& sec, const std::string& key) {
        auto f = field(sec, key);
        return f ? f->second : 0;
    };

    allowed("detector", {"epsilon", "delta", "roc", "snr", "samples", "threshold", "class"});
    allowed("constraint", {"zeta", "eta", "space"});
    allowed("strategy", {"kind", "horizon", "grid"});
    allowed("policy", {"file", "power"});
    allowed("run", {"slots", "seeds", "window", "output"});

    // detector
    {
        auto& d = sc.detector;
        if (auto c = field("detector", "class")) {
            d.detector_class = c->first;
        }
        const bool has_roc = field("detector", "roc").has_value();
        const bool has_energy = field("detector", "snr").has_value();
        if (has_roc && has_energy) {
            throw fail(line_of("detector", "snr"), "detector: choose one of roc= or snr=");
        }
        if (has_roc) {
            d.kind = DetectorKind::roc;
            const auto f = *field("detector", "roc");
            try {
                d.roc = RocCurve::load(resolve(base_dir, f.first));
            } catch (const std::exception& e) {
                throw fail(f.second, e.what());
            }
            d.delta = number("detector", "delta", d.roc->min_delta());
            if (d.delta < d.roc->min_delta() || d.delta > d.roc->max_delta()) {
                throw fail(line_of("detector", "delta"), "delta outside the ROC support");
            }
        } else if (has_energy) {
            d.kind = DetectorKind::energy;
            EnergyDetectorSpec e;
            e.snr = number("detector", "snr", 1.0);
            e.num_samples = static_cast<int>(number("detector", "samples", 1.0));
            e.threshold = number("detector", "threshold", 1.0);
            try {
                e.validate();
            } catch (const std::exception& ex) {
                throw fail(line_of("detector", "snr"), ex.what());
            }
            d.energy = e;
        } else {
            d.kind = DetectorKind::fixed;
            d.epsilon = number("detector", "epsilon", 0.0);
            d.delta = number("detector", "delta", 0.0);
            if (!(d.epsilon >= 0.0 && d.epsilon <= 1.0)) {
                throw fail(line_of("detector", "epsilon"), "epsilon must lie in [0,1]");
            }
            if (!(d.delta >= 0.0 && d.delta < 1.0)) {
                throw fail(line_of("detector", "delta"), "delta must lie in [0,1)");
            }
        }
    }

    // constraint
    sc.constraint.zeta = number("constraint", "zeta", 0.1);
    sc.constraint.eta = number("constraint", "eta", 1.0);
    if (auto s = field("constraint", "space")) {
        try {
            sc.constraint.collision_space = parse_collision_space(s->first);
        } catch (const std::exception& e) {
            throw fail(s->second, e.what());
        }
    }
    try {
        sc.constraint.validate();
    } catch (const std::exception& e) {
        throw fail(line_of("constraint", "zeta"), e.what());
    }

    // strategy
    if (auto k = field("strategy", "kind")) {
        try {
            sc.strategy.kind = parse_strategy_kind(k->first);
        } catch (const std::exception& e) {
            throw fail(k->second, e.what());
        }
    }
    sc.strategy.horizon = static_cast<int>(number("strategy", "horizon", 1));
    sc.strategy.grid_resolution = static_cast<int>(number("strategy", "grid", 33));
    if (sc.strategy.horizon < 1) {
        throw fail(line_of("strategy", "horizon"), "horizon must be at least 1");
    }
    if (sc.strategy.grid_resolution < 2) {
        throw fail(line_of("strategy", "grid"), "grid resolution must be at least 2");
    }
    if (sc.strategy.kind == StrategyKind::value_iteration && sc.joint) {
        throw fail(line_of("strategy", "kind"), "value_iteration requires independent per-channel chains");
    }

    // topology
    if (sc.topology) {
        if (!have_radii) {
            throw fail(topology_line, "topology needs a 'radii' line");
        }
        for (int id : primary_order) {
            sc.topology->primaries.push_back(primaries.at(id));
        }
        sc.topology->eta = sc.constraint.eta;
        try {
            sc.topology->validate();
        } catch (const std::exception& e) {
            throw fail(topology_line, e.what());
        }
    }

    // policy
    sc.policy.tx_power = number("policy", "power", 1.0);
    if (!(sc.policy.tx_power >= 0.0)) {
        throw fail(line_of("policy", "power"), "power must be nonnegative");
    }
    if (auto f = field("policy", "file")) {
        try {
            sc.policy.rules = PolicySet::load(resolve(base_dir, f->first));
        } catch (const std::exception& e) {
            throw fail(f->second, e.what());
        }
    }

    // run
    const double slots = number("run", "slots", 10000);
    if (!(slots >= 1)) {
        throw fail(line_of("run", "slots"), "slots must be at least 1");
    }
    sc.run.slots = static_cast<std::uint64_t>(slots);
    if (auto s = field("run", "seeds")) {
        sc.run.seeds.clear();
        try {
            for (int v : parse_int_list(s->first)) {
                if (v < 0) {
                    throw std::invalid_argument("seeds must be nonnegative");
                }
                sc.run.seeds.push_back(static_cast<std::uint64_t>(v));
            }
        } catch (const std::exception& e) {
            throw fail(s->second, e.what());
        }
        if (sc.run.seeds.empty()) {
            throw fail(s->second, "seed list is empty");
        }
    }
    sc.run.window = static_cast<std::uint64_t>(number("run", "window", 0));
    if (auto o = field("run", "output")) {
        sc.run.output_dir = resolve(base_dir, o->first);
    }

    // operating point must be usable by the access rule
    try {
        const auto op = sc.detector.operating_point();
        optimal_access_policy(op.delta, sc.constraint.zeta);
    } catch (const std::exception& e) {
        throw fail(line_of("detector", "delta"), e.what());
    }
    return sc;
}

Scenario Scenario::load(const std::string& path) {
    const std::string text = read_file(path);
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) {
        base = ".";
    }
    return parse(text, path, base);
}

std::string Scenario::config_hash() const {
    return hex64(fnv1a64(text));
}

ClosedLoopSetup Scenario::closed_loop() const {
    ClosedLoopSetup s;
    s.chains = chains;
    s.joint = joint;
    s.initial_state = initial_state;
    s.strategy = strategy;
    s.slots = run.slots;
    s.seeds = run.seeds;
    return s;
}

double Scenario::transmit_power() const {
    if (!topology) {
        return policy.tx_power;
    }
    // The transmitter only detects primary transmitters out to r_p + r_tx.
    const double bound = max_power(constraint.eta, topology->r_p + topology->r_tx, topology->alpha, topology->r_p);
    return std::min(policy.tx_power, bound);
}

} // namespace osa
