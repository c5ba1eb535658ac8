#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnav/common.hpp"

namespace bnav {

/// Physical attributes of one directed road segment.
struct EdgeAttributes {
    double length_m = 0.0;
    double incline_rad = 0.0;
    double speed_limit_mps = 0.0;
    double mean_speed_mps = 0.0;
    double speed_var = 0.0;
    // Endpoint coordinates, only carried through for plotting.
    std::optional<double> lat1, lon1, lat2, lon2;
};

struct Edge {
    VertexId from = 0;
    VertexId to = 0;
    EdgeAttributes attrs;
};

/// Directed graph with dense vertex and edge ids. Immutable once built; safe
/// to share across concurrent runs.
class RoadGraph {
  public:
    RoadGraph() = default;
    explicit RoadGraph(std::size_t num_vertices);

    /// Appends a directed edge and returns its id. Rejects self-loops and
    /// unknown endpoints.
    EdgeId add_edge(VertexId from, VertexId to, EdgeAttributes attrs = {});

    std::size_t num_vertices() const { return out_.size(); }
    std::size_t num_edges() const { return edges_.size(); }

    const Edge& edge(EdgeId e) const { return edges_.at(e); }
    std::span<const Edge> edges() const { return edges_; }
    /// Out-edges of `v` in increasing id order.
    std::span<const EdgeId> out_edges(VertexId v) const { return out_.at(v); }

  private:
    std::vector<Edge> edges_;
    std::vector<std::vector<EdgeId>> out_;
};

/// A walk through the graph, stored as its edge sequence. Shortest-path
/// results are always simple; exploration moves may concatenate segments.
struct Path {
    VertexId source = 0;
    std::vector<EdgeId> edges;

    bool empty() const { return edges.empty(); }
    std::vector<VertexId> vertices(const RoadGraph& graph) const;

    friend bool operator==(const Path&, const Path&) = default;
};

/// Stable 64-bit hash of the edge sequence (FNV-1a). Used as the trace key
/// and as the queue key of the delayed-feedback wrapper.
std::uint64_t path_hash(const Path& path);
std::string path_hash_hex(const Path& path);

/// Dijkstra over strictly positive finite weights. Equal-cost paths are
/// resolved towards the lexicographically smallest edge-id sequence.
/// Throws ValidationError on bad weights, NoPathError if `target` is
/// unreachable.
Path shortest_path(const RoadGraph& graph, std::span<const double> weights,
                   VertexId source, VertexId target);

/// Least-cost walk for weights of any sign. Returns nullopt when a negative
/// cycle makes the cost unbounded below.
std::optional<Path> bellman_ford_path(const RoadGraph& graph, std::span<const double> weights,
                                      VertexId source, VertexId target);

double path_weight(const Path& path, std::span<const double> weights);

/// True if consecutive edges connect head-to-tail starting at path.source.
bool is_connected(const RoadGraph& graph, const Path& path);
bool is_simple(const RoadGraph& graph, const Path& path);

struct Diagnostic {
    enum class Kind { Unreachable, DanglingEdge, AttributeViolation, BadVertex };
    Kind kind;
    std::string message;
};

std::vector<Diagnostic> validate_graph(const RoadGraph& graph, VertexId source,
                                       VertexId target);

std::string to_string(Diagnostic::Kind kind);

}  // namespace bnav
