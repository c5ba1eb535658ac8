#include "bnav/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <queue>

namespace bnav {

RoadGraph::RoadGraph(std::size_t num_vertices) : out_(num_vertices) {}

EdgeId RoadGraph::add_edge(VertexId from, VertexId to, EdgeAttributes attrs) {
    if (from >= out_.size() || to >= out_.size())
        throw ValidationError("edge endpoint out of range: " + std::to_string(from) + "->" +
                              std::to_string(to));
    if (from == to) throw ValidationError("self-loop on vertex " + std::to_string(from));
    const auto id = static_cast<EdgeId>(edges_.size());
    edges_.push_back({from, to, std::move(attrs)});
    out_[from].push_back(id);
    return id;
}

std::vector<VertexId> Path::vertices(const RoadGraph& graph) const {
    std::vector<VertexId> vs{source};
    for (EdgeId e : edges) vs.push_back(graph.edge(e).to);
    return vs;
}

std::uint64_t path_hash(const Path& path) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    mix(path.source);
    for (EdgeId e : path.edges) mix(e);
    return h;
}

std::string path_hash_hex(const Path& path) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(path_hash(path)));
    return buf;
}

namespace {

constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

// Edge sequence from the source to `v` following predecessor links.
std::vector<EdgeId> trace_back(const RoadGraph& graph, const std::vector<EdgeId>& pred,
                               VertexId v) {
    std::vector<EdgeId> seq;
    while (pred[v] != kNoEdge) {
        seq.push_back(pred[v]);
        v = graph.edge(pred[v]).from;
    }
    std::reverse(seq.begin(), seq.end());
    return seq;
}

}  // namespace

Path shortest_path(const RoadGraph& graph, std::span<const double> weights, VertexId source,
                   VertexId target) {
    if (weights.size() != graph.num_edges())
        throw ValidationError("weight vector has " + std::to_string(weights.size()) +
                              " entries, graph has " + std::to_string(graph.num_edges()) +
                              " edges");
    if (source >= graph.num_vertices() || target >= graph.num_vertices())
        throw ValidationError("source or target vertex out of range");
    for (std::size_t e = 0; e < weights.size(); ++e) {
        if (!std::isfinite(weights[e]) || weights[e] <= 0.0)
            throw ValidationError("edge " + std::to_string(e) +
                                  " has non-positive or non-finite weight");
    }

    const auto n = graph.num_vertices();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<EdgeId> pred(n, kNoEdge);
    std::vector<bool> settled(n, false);

    using Item = std::pair<double, VertexId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist[source] = 0.0;
    pq.emplace(0.0, source);

    while (!pq.empty()) {
        const auto [d, u] = pq.top();
        pq.pop();
        if (settled[u]) continue;
        settled[u] = true;
        if (u == target) break;

        for (EdgeId e : graph.out_edges(u)) {
            const VertexId v = graph.edge(e).to;
            if (settled[v]) continue;
            const double nd = d + weights[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                pred[v] = e;
                pq.emplace(nd, v);
            } else if (nd == dist[v]) {
                // Exact tie: keep the lexicographically smaller edge sequence.
                auto candidate = trace_back(graph, pred, u);
                candidate.push_back(e);
                if (candidate < trace_back(graph, pred, v)) pred[v] = e;
            }
        }
    }

    if (!settled[target])
        throw NoPathError("no path from vertex " + std::to_string(source) + " to vertex " +
                          std::to_string(target));
    return Path{source, trace_back(graph, pred, target)};
}

std::optional<Path> bellman_ford_path(const RoadGraph& graph, std::span<const double> weights,
                                      VertexId source, VertexId target) {
    if (weights.size() != graph.num_edges())
        throw ValidationError("weight vector does not match the edge count");
    if (source >= graph.num_vertices() || target >= graph.num_vertices())
        throw ValidationError("source or target vertex out of range");
    for (double w : weights)
        if (!std::isfinite(w)) throw ValidationError("non-finite edge weight");

    const auto n = graph.num_vertices();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    std::vector<EdgeId> pred(n, kNoEdge);
    dist[source] = 0.0;
    auto relax = [&] {
        bool changed = false;
        for (EdgeId e = 0; e < graph.num_edges(); ++e) {
            const Edge& edge = graph.edge(e);
            if (dist[edge.from] == std::numeric_limits<double>::infinity()) continue;
            const double nd = dist[edge.from] + weights[e];
            if (nd < dist[edge.to]) {
                dist[edge.to] = nd;
                pred[edge.to] = e;
                changed = true;
            }
        }
        return changed;
    };
    bool changed = true;
    for (std::size_t i = 1; i < n && changed; ++i) changed = relax();
    if (changed && relax()) return std::nullopt;
    if (dist[target] == std::numeric_limits<double>::infinity())
        throw NoPathError("no path from vertex " + std::to_string(source) + " to vertex " +
                          std::to_string(target));
    return Path{source, trace_back(graph, pred, target)};
}

double path_weight(const Path& path, std::span<const double> weights) {
    double sum = 0.0;
    for (EdgeId e : path.edges) {
        if (e >= weights.size())
            throw ValidationError("edge id " + std::to_string(e) + " out of range");
        sum += weights[e];
    }
    return sum;
}

bool is_connected(const RoadGraph& graph, const Path& path) {
    VertexId at = path.source;
    for (EdgeId e : path.edges) {
        if (e >= graph.num_edges() || graph.edge(e).from != at) return false;
        at = graph.edge(e).to;
    }
    return true;
}

bool is_simple(const RoadGraph& graph, const Path& path) {
    auto vs = path.vertices(graph);
    std::sort(vs.begin(), vs.end());
    return std::adjacent_find(vs.begin(), vs.end()) == vs.end();
}

std::vector<Diagnostic> validate_graph(const RoadGraph& graph, VertexId source,
                                       VertexId target) {
    std::vector<Diagnostic> out;
    const auto n = graph.num_vertices();

    for (std::size_t i = 0; i < graph.num_edges(); ++i) {
        const Edge& e = graph.edge(static_cast<EdgeId>(i));
        const std::string tag = "edge " + std::to_string(i);
        if (e.from >= n || e.to >= n) {
            out.push_back({Diagnostic::Kind::DanglingEdge, tag + " references a missing vertex"});
            continue;
        }
        const auto& a = e.attrs;
        if (!(a.length_m >= 0.0))
            out.push_back({Diagnostic::Kind::AttributeViolation, tag + ": negative length"});
        if (!(a.speed_limit_mps >= 0.0) || !(a.mean_speed_mps >= 0.0) || !(a.speed_var >= 0.0))
            out.push_back({Diagnostic::Kind::AttributeViolation, tag + ": negative speed field"});
        if (!(std::abs(a.incline_rad) < std::numbers::pi / 2))
            out.push_back(
                {Diagnostic::Kind::AttributeViolation, tag + ": incline outside (-pi/2, pi/2)"});
    }

    if (source >= n || target >= n) {
        out.push_back({Diagnostic::Kind::BadVertex, "source or target vertex does not exist"});
        return out;
    }

    std::vector<bool> seen(n, false);
    std::vector<VertexId> stack{source};
    seen[source] = true;
    while (!stack.empty()) {
        const VertexId u = stack.back();
        stack.pop_back();
        for (EdgeId e : graph.out_edges(u)) {
            const VertexId v = graph.edge(e).to;
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    if (!seen[target])
        out.push_back({Diagnostic::Kind::Unreachable, "target vertex " + std::to_string(target) +
                                                          " is unreachable from source " +
                                                          std::to_string(source)});
    return out;
}

std::string to_string(Diagnostic::Kind kind) {
    switch (kind) {
        case Diagnostic::Kind::Unreachable: return "unreachable";
        case Diagnostic::Kind::DanglingEdge: return "dangling-edge";
        case Diagnostic::Kind::AttributeViolation: return "attribute-violation";
        case Diagnostic::Kind::BadVertex: return "bad-vertex";
    }
    return "unknown";
}

}  // namespace bnav
