#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "osa/geometry.hpp"
#include "osa/rng.hpp"

namespace osa {

struct ConflictVertex {
    std::string name;
    Point position;
    std::set<int> color_list; // permitted channels

    bool starved() const { return color_list.empty(); }
};

/// Secondary users as vertices, mutual interference as edges.
class ConflictGraph {
public:
    std::size_t add_vertex(ConflictVertex v);
    void add_edge(std::size_t u, std::size_t v);

    std::size_t size() const { return vertices_.size(); }
    const ConflictVertex& vertex(std::size_t i) const { return vertices_.at(i); }
    ConflictVertex& vertex(std::size_t i) { return vertices_.at(i); }
    const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_.at(i); }
    bool adjacent(std::size_t u, std::size_t v) const;
    std::size_t degree(std::size_t i) const { return adjacency_.at(i).size(); }
    std::vector<std::pair<std::size_t, std::size_t>> edges() const;

    /// Index of the vertex with this name; throws std::invalid_argument if absent.
    std::size_t index_of(const std::string& name) const;

    /// Fixture text: `id x y list:c1,c2` vertex lines, `edge u v` lines and
    /// optional `bandwidth c B` lines (returned through `bandwidths`).
    static ConflictGraph parse(const std::string& text, std::map<int, double>* bandwidths = nullptr);
    static ConflictGraph load(const std::string& path, std::map<int, double>* bandwidths = nullptr);

private:
    std::vector<ConflictVertex> vertices_;
    std::vector<std::vector<std::size_t>> adjacency_;
};

/// Channels per vertex, indexed like the graph's vertices.
struct ColorAssignment {
    std::vector<std::set<int>> channels;
};

/// Empty string when valid, otherwise the first violated invariant.
std::string validation_error(const ConflictGraph& g, const ColorAssignment& a);
bool is_valid(const ConflictGraph& g, const ColorAssignment& a);

/// No vertex can add a list channel without clashing with a neighbor.
bool is_maximal(const ConflictGraph& g, const ColorAssignment& a, bool single_channel = false);

struct PrimaryCoverage {
    Point center;
    double radius = 0.0;
    int channel = 0;
};

/// color_list(v) = channels minus those of primaries covering v; edge iff
/// distance <= interference_radius.
ConflictGraph build_conflict_graph(const Topology& topology, double interference_radius,
                                   const std::vector<PrimaryCoverage>& coverage, const std::vector<int>& channels);

enum class Objective { sum_bandwidth, proportional_fair };
enum class VertexOrder { static_order, max_degree_first };

const char* to_string(Objective o);

/// Bandwidth of a channel; channels missing from the map weigh 1.
double channel_bandwidth(const std::map<int, double>& bandwidths, int channel);

/// sum: sum_v sum_c B_c. proportional-fair: sum_v log(1 + sum_c B_c).
double utility(const ColorAssignment& a, const std::map<int, double>& bandwidths, Objective objective);

struct GreedyOptions {
    Objective objective = Objective::sum_bandwidth;
    VertexOrder order = VertexOrder::max_degree_first;
    bool single_channel = false;
};

/// Centralized greedy list coloring. Vertices are visited in the given order; a
/// vertex takes a free list channel unless pending neighbors that could still
/// use it would gain more in total, in which case it is revisited later.
ColorAssignment greedy_color(const ConflictGraph& g, const std::map<int, double>& bandwidths,
                             const GreedyOptions& options = {});

struct DistributedResult {
    ColorAssignment assignment;
    int rounds_used = 0;
    bool converged = false;
};

/// Synchronous randomized rounds. Each round a vertex first takes every
/// available channel no neighbor can use; then, with probability 1/2, it
/// proposes one random contested channel, which it keeps unless a neighbor
/// proposed the same channel in that round.
DistributedResult distributed_color(const ConflictGraph& g, int rounds, Rng& rng, bool single_channel = false);

/// Exhaustive optimum; only for small instances (throws past ~5e7 combinations).
ColorAssignment optimal_color(const ConflictGraph& g, const std::map<int, double>& bandwidths, Objective objective,
                              bool single_channel = false);

/// CSV with header `vertex,channels`; channels separated by ';'.
std::string assignment_csv(const ConflictGraph& g, const ColorAssignment& a);

} // namespace osa
