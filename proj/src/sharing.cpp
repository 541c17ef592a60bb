#include "osa/sharing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "osa/text_util.hpp"

namespace osa {

std::size_t ConflictGraph::add_vertex(ConflictVertex v) {
    for (const auto& existing : vertices_) {
        if (existing.name == v.name) {
            throw std::invalid_argument("duplicate vertex '" + v.name + "'");
        }
    }
    vertices_.push_back(std::move(v));
    adjacency_.emplace_back();
    return vertices_.size() - 1;
}

void ConflictGraph::add_edge(std::size_t u, std::size_t v) {
    if (u >= size() || v >= size()) {
        throw std::invalid_argument("edge references a missing vertex");
    }
    if (u == v) {
        throw std::invalid_argument("self-loop on vertex '" + vertices_[u].name + "'");
    }
    if (adjacent(u, v)) {
        return;
    }
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
    std::sort(adjacency_[u].begin(), adjacency_[u].end());
    std::sort(adjacency_[v].begin(), adjacency_[v].end());
}

bool ConflictGraph::adjacent(std::size_t u, std::size_t v) const {
    const auto& n = adjacency_.at(u);
    return std::binary_search(n.begin(), n.end(), v);
}

std::vector<std::pair<std::size_t, std::size_t>> ConflictGraph::edges() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t u = 0; u < size(); ++u) {
        for (std::size_t v : adjacency_[u]) {
            if (u < v) {
                out.emplace_back(u, v);
            }
        }
    }
    return out;
}

std::size_t ConflictGraph::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < vertices_.size(); ++i) {
        if (vertices_[i].name == name) {
            return i;
        }
    }
    throw std::invalid_argument("unknown vertex '" + name + "'");
}

ConflictGraph ConflictGraph::parse(const std::string& text, std::map<int, double>* bandwidths) {
    ConflictGraph g;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = strip_comment(raw);
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::vector<std::string> tok;
        for (std::string t; ls >> t;) {
            tok.push_back(t);
        }
        try {
            if (tok[0] == "edge") {
                if (tok.size() != 3) {
                    throw std::invalid_argument("expected 'edge u v'");
                }
                g.add_edge(g.index_of(tok[1]), g.index_of(tok[2]));
            } else if (tok[0] == "bandwidth") {
                if (tok.size() != 3) {
                    throw std::invalid_argument("expected 'bandwidth channel value'");
                }
                const double b = parse_double(tok[2]);
                if (!(b > 0.0)) {
                    throw std::invalid_argument("bandwidth must be positive");
                }
                if (bandwidths != nullptr) {
                    (*bandwidths)[static_cast<int>(parse_int(tok[1]))] = b;
                }
            } else {
                if (tok.size() != 4 || tok[3].rfind("list:", 0) != 0) {
                    throw std::invalid_argument("expected 'id x y list:c1,c2'");
                }
                ConflictVertex v;
                v.name = tok[0];
                v.position = {parse_double(tok[1]), parse_double(tok[2])};
                for (int c : parse_int_list(tok[3].substr(5))) {
                    v.color_list.insert(c);
                }
                g.add_vertex(std::move(v));
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError("graph", line_no, e.what());
        }
    }
    return g;
}

ConflictGraph ConflictGraph::load(const std::string& path, std::map<int, double>* bandwidths) {
    return parse(read_file(path), bandwidths);
}

std::string validation_error(const ConflictGraph& g, const ColorAssignment& a) {
    if (a.channels.size() != g.size()) {
        return "assignment size does not match graph";
    }
    for (std::size_t v = 0; v < g.size(); ++v) {
        for (int c : a.channels[v]) {
            if (g.vertex(v).color_list.count(c) == 0) {
                return "vertex " + g.vertex(v).name + " assigned channel " + std::to_string(c) + " outside its list";
            }
        }
    }
    for (const auto& [u, v] : g.edges()) {
        for (int c : a.channels[u]) {
            if (a.channels[v].count(c) != 0) {
                return "adjacent vertices " + g.vertex(u).name + " and " + g.vertex(v).name + " share channel " +
                       std::to_string(c);
            }
        }
    }
    return {};
}

bool is_valid(const ConflictGraph& g, const ColorAssignment& a) {
    return validation_error(g, a).empty();
}

namespace {

bool held_by_neighbor(const ConflictGraph& g, const ColorAssignment& a, std::size_t v, int c) {
    for (std::size_t u : g.neighbors(v)) {
        if (a.channels[u].count(c) != 0) {
            return true;
        }
    }
    return false;
}

std::vector<int> available(const ConflictGraph& g, const ColorAssignment& a, std::size_t v) {
    std::vector<int> out;
    for (int c : g.vertex(v).color_list) {
        if (a.channels[v].count(c) == 0 && !held_by_neighbor(g, a, v, c)) {
            out.push_back(c);
        }
    }
    return out;
}

double bandwidth_sum(const std::set<int>& channels, const std::map<int, double>& bw) {
    double s = 0.0;
    for (int c : channels) {
        s += channel_bandwidth(bw, c);
    }
    return s;
}

double marginal_gain(const std::set<int>& current, int c, const std::map<int, double>& bw, Objective objective) {
    const double b = channel_bandwidth(bw, c);
    if (objective == Objective::sum_bandwidth) {
        return b;
    }
    const double s = bandwidth_sum(current, bw);
    return std::log1p(s + b) - std::log1p(s);
}

std::vector<std::size_t> vertex_order(const ConflictGraph& g, VertexOrder order) {
    std::vector<std::size_t> idx(g.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (order == VertexOrder::max_degree_first) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return g.degree(a) > g.degree(b); });
    }
    return idx;
}

std::vector<int> channels_by_bandwidth(const ConflictGraph& g, const std::map<int, double>& bw) {
    std::set<int> all;
    for (std::size_t v = 0; v < g.size(); ++v) {
        all.insert(g.vertex(v).color_list.begin(), g.vertex(v).color_list.end());
    }
    std::vector<int> out(all.begin(), all.end());
    std::stable_sort(out.begin(), out.end(),
                     [&](int a, int b) { return channel_bandwidth(bw, a) > channel_bandwidth(bw, b); });
    return out;
}

// Widest channel first. In single-channel mode a vertex drops out once it
// holds a channel.
void greedy_fill(const ConflictGraph& g, const std::map<int, double>& bw, const GreedyOptions& opt,
                 ColorAssignment& a) {
    const auto order = vertex_order(g, opt.order);
    for (int c : channels_by_bandwidth(g, bw)) {
        std::vector<std::size_t> pending;
        for (std::size_t v : order) {
            if (g.vertex(v).color_list.count(c) != 0 && !(opt.single_channel && !a.channels[v].empty())) {
                pending.push_back(v);
            }
        }
        auto is_pending = [&](std::size_t u) {
            return std::find(pending.begin(), pending.end(), u) != pending.end() &&
                   !(opt.single_channel && !a.channels[u].empty());
        };
        // Gain v would get minus what its pending neighbors would lose.
        auto net_gain = [&](std::size_t v) {
            double contest = 0.0;
            for (std::size_t u : g.neighbors(v)) {
                if (is_pending(u) && !held_by_neighbor(g, a, u, c)) {
                    contest += marginal_gain(a.channels[u], c, bw, opt.objective);
                }
            }
            return marginal_gain(a.channels[v], c, bw, opt.objective) - contest;
        };
        while (!pending.empty()) {
            bool progress = false;
            for (std::size_t k = 0; k < pending.size();) {
                const std::size_t v = pending[k];
                if (held_by_neighbor(g, a, v, c)) {
                    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
                    progress = true;
                    continue;
                }
                if (net_gain(v) >= 0.0) {
                    a.channels[v].insert(c);
                    pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(k));
                    progress = true;
                    continue;
                }
                ++k;
            }
            if (!progress) {
                // Everyone is contested: commit the least damaging vertex.
                std::size_t best = 0;
                double best_gain = net_gain(pending[0]);
                for (std::size_t k = 1; k < pending.size(); ++k) {
                    const double ng = net_gain(pending[k]);
                    if (ng > best_gain) {
                        best_gain = ng;
                        best = k;
                    }
                }
                a.channels[pending[best]].insert(c);
                pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
            }
        }
    }
}

} // namespace

bool is_maximal(const ConflictGraph& g, const ColorAssignment& a, bool single_channel) {
    for (std::size_t v = 0; v < g.size(); ++v) {
        if (single_channel && !a.channels[v].empty()) {
            continue;
        }
        if (!available(g, a, v).empty()) {
            return false;
        }
    }
    return true;
}

ConflictGraph build_conflict_graph(const Topology& topology, double interference_radius,
                                   const std::vector<PrimaryCoverage>& coverage, const std::vector<int>& channels) {
    ConflictGraph g;
    for (const auto& s : topology.secondaries) {
        ConflictVertex v;
        v.name = std::to_string(s.id);
        v.position = s.position;
        for (int c : channels) {
            bool covered = false;
            for (const auto& cov : coverage) {
                if (cov.channel == c && distance(cov.center, s.position) <= cov.radius) {
                    covered = true;
                    break;
                }
            }
            if (!covered) {
                v.color_list.insert(c);
            }
        }
        g.add_vertex(std::move(v));
    }
    for (std::size_t u = 0; u < g.size(); ++u) {
        for (std::size_t v = u + 1; v < g.size(); ++v) {
            if (distance(g.vertex(u).position, g.vertex(v).position) <= interference_radius) {
                g.add_edge(u, v);
            }
        }
    }
    return g;
}

const char* to_string(Objective o) {
    return o == Objective::sum_bandwidth ? "sum" : "proportional-fair";
}

double channel_bandwidth(const std::map<int, double>& bandwidths, int channel) {
    const auto it = bandwidths.find(channel);
    return it == bandwidths.end() ? 1.0 : it->second;
}

double utility(const ColorAssignment& a, const std::map<int, double>& bandwidths, Objective objective) {
    double total = 0.0;
    for (const auto& chans : a.channels) {
        const double s = bandwidth_sum(chans, bandwidths);
        total += objective == Objective::sum_bandwidth ? s : std::log1p(s);
    }
    return total;
}

ColorAssignment greedy_color(const ConflictGraph& g, const std::map<int, double>& bandwidths,
                             const GreedyOptions& options) {
    ColorAssignment a;
    a.channels.resize(g.size());
    greedy_fill(g, bandwidths, options, a);
    return a;
}

DistributedResult distributed_color(const ConflictGraph& g, int rounds, Rng& rng, bool single_channel) {
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be at least 1");
    }
    DistributedResult out;
    out.assignment.channels.resize(g.size());
    auto& a = out.assignment;
    auto active = [&](std::size_t v) { return !(single_channel && !a.channels[v].empty()); };

    for (int r = 0; r < rounds; ++r) {
        if (is_maximal(g, a, single_channel)) {
            out.converged = true;
            break;
        }
        out.rounds_used = r + 1;
        std::vector<std::vector<int>> avail(g.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            if (active(v)) {
                avail[v] = available(g, a, v);
            }
        }
        auto contested = [&](std::size_t v, int c) {
            for (std::size_t u : g.neighbors(v)) {
                if (std::find(avail[u].begin(), avail[u].end(), c) != avail[u].end()) {
                    return true;
                }
            }
            return false;
        };
        // Uncontested channels can be taken by their only candidate.
        std::vector<int> proposal(g.size(), 0);
        std::vector<bool> proposing(g.size(), false);
        std::vector<std::vector<int>> take(g.size());
        for (std::size_t v = 0; v < g.size(); ++v) {
            std::vector<int> open;
            for (int c : avail[v]) {
                if (contested(v, c)) {
                    open.push_back(c);
                } else {
                    take[v].push_back(c);
                }
            }
            if (single_channel && !take[v].empty()) {
                take[v].resize(1);
                open.clear();
            }
            // Two draws per vertex per round keep streams aligned.
            const double u_act = uniform01(rng);
            const double u_pick = uniform01(rng);
            if (!open.empty() && u_act < 0.5) {
                proposing[v] = true;
                proposal[v] = open[std::min(open.size() - 1, static_cast<std::size_t>(u_pick * open.size()))];
            }
        }
        for (std::size_t v = 0; v < g.size(); ++v) {
            for (int c : take[v]) {
                a.channels[v].insert(c);
            }
            if (!proposing[v]) {
                continue;
            }
            bool clash = false;
            for (std::size_t u : g.neighbors(v)) {
                if (proposing[u] && proposal[u] == proposal[v]) {
                    clash = true;
                    break;
                }
            }
            if (!clash) {
                a.channels[v].insert(proposal[v]);
            }
        }
    }
    if (!out.converged) {
        out.converged = is_maximal(g, a, single_channel);
    }
    return out;
}

namespace {

struct Search {
    const ConflictGraph& g;
    const std::map<int, double>& bw;
    Objective objective;
    bool single_channel;
    std::vector<std::vector<std::set<int>>> options;
    ColorAssignment current;
    ColorAssignment best;
    double best_value = -1.0;

    void run(std::size_t v) {
        if (v == g.size()) {
            const double u = utility(current, bw, objective);
            if (u > best_value) {
                best_value = u;
                best = current;
            }
            return;
        }
        for (const auto& choice : options[v]) {
            bool ok = true;
            for (std::size_t u : g.neighbors(v)) {
                if (u >= v) {
                    continue;
                }
                for (int c : choice) {
                    if (current.channels[u].count(c) != 0) {
                        ok = false;
                        break;
                    }
                }
                if (!ok) {
                    break;
                }
            }
            if (!ok) {
                continue;
            }
            current.channels[v] = choice;
            run(v + 1);
        }
        current.channels[v].clear();
    }
};

} // namespace

ColorAssignment optimal_color(const ConflictGraph& g, const std::map<int, double>& bandwidths, Objective objective,
                              bool single_channel) {
    Search s{g, bandwidths, objective, single_channel, {}, {}, {}, -1.0};
    double combos = 1.0;
    for (std::size_t v = 0; v < g.size(); ++v) {
        const std::vector<int> list(g.vertex(v).color_list.begin(), g.vertex(v).color_list.end());
        std::vector<std::set<int>> opts;
        if (single_channel) {
            opts.emplace_back();
            for (int c : list) {
                opts.push_back({c});
            }
        } else {
            if (list.size() > 16) {
                throw std::invalid_argument("color list too long for exhaustive search");
            }
            for (std::size_t mask = 0; mask < (std::size_t{1} << list.size()); ++mask) {
                std::set<int> subset;
                for (std::size_t i = 0; i < list.size(); ++i) {
                    if (((mask >> i) & 1U) != 0) {
                        subset.insert(list[i]);
                    }
                }
                opts.push_back(std::move(subset));
            }
        }
        // Larger subsets first so strong incumbents appear early.
        std::stable_sort(opts.begin(), opts.end(),
                         [](const std::set<int>& x, const std::set<int>& y) { return x.size() > y.size(); });
        combos *= static_cast<double>(opts.size());
        s.options.push_back(std::move(opts));
    }
    if (combos > 5e7) {
        throw std::invalid_argument("instance too large for exhaustive search");
    }
    s.current.channels.resize(g.size());
    s.best.channels.resize(g.size());
    s.run(0);
    return s.best;
}

std::string assignment_csv(const ConflictGraph& g, const ColorAssignment& a) {
    std::ostringstream out;
    out << "vertex,channels\n";
    for (std::size_t v = 0; v < g.size(); ++v) {
        out << g.vertex(v).name << ',';
        bool first = true;
        for (int c : a.channels[v]) {
            out << (first ? "" : ";") << c;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace osa
