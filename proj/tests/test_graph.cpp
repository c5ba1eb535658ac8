#include <algorithm>
#include <random>

#include "bnav/graph.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bnav;

TEST_CASE("triangle prefers the two-hop path") {
    RoadGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    const std::vector<double> w{1, 1, 3};
    const Path p = shortest_path(g, w, 0, 2);
    CHECK(p.edges == std::vector<EdgeId>{0, 1});
    CHECK(p.vertices(g) == std::vector<VertexId>{0, 1, 2});
    CHECK(path_weight(p, w) == 2.0);
}

TEST_CASE("single edge") {
    RoadGraph g(2);
    g.add_edge(0, 1);
    const std::vector<double> w{5};
    const Path p = shortest_path(g, w, 0, 1);
    CHECK(p.edges == std::vector<EdgeId>{0});
    CHECK(path_weight(p, w) == 5.0);
}

TEST_CASE("random 8-vertex DAGs match exhaustive enumeration") {
    std::mt19937_64 rng(8);
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const RoadGraph g = oracle::random_dag(8, 0.45, rng);
        const auto w = oracle::random_weights(g.num_edges(), 0.1, 10.0, rng);
        const double best = oracle::brute_force_min(g, w, 0, 7);
        if (std::isinf(best)) {
            CHECK_THROWS_AS(shortest_path(g, w, 0, 7), NoPathError);
            continue;
        }
        const Path p = shortest_path(g, w, 0, 7);
        CHECK(path_weight(p, w) == doctest::Approx(best).epsilon(1e-12));
        CHECK(is_connected(g, p));
        CHECK(is_simple(g, p));
        ++checked;
    }
    CHECK(checked > 100);
}

TEST_CASE("returned path is in the optimal set and survives weight scaling") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 200; ++trial) {
        const RoadGraph g = oracle::random_graph(7, 0.35, rng);
        // Integer weights make exact ties common.
        std::uniform_int_distribution<int> pick(1, 4);
        std::vector<double> w(g.num_edges());
        for (auto& x : w) x = pick(rng);
        const double best = oracle::brute_force_min(g, w, 0, 6);
        if (std::isinf(best)) continue;

        const Path p = shortest_path(g, w, 0, 6);
        CHECK(path_weight(p, w) == best);
        for (const auto& alt : oracle::all_simple_paths(g, 0, 6))
            CHECK(path_weight(p, w) <= oracle::cost(alt, w));

        std::vector<double> scaled(w);
        for (auto& x : scaled) x *= 3.5;
        const Path q = shortest_path(g, scaled, 0, 6);
        CHECK(path_weight(q, scaled) == doctest::Approx(3.5 * best));
        CHECK(path_weight(q, w) == best);
    }
}

TEST_CASE("exact ties resolve to the lexicographically smallest edge sequence") {
    RoadGraph g(4);
    g.add_edge(0, 2);  // 0
    g.add_edge(2, 3);  // 1
    g.add_edge(0, 1);  // 2
    g.add_edge(1, 3);  // 3
    const std::vector<double> w{1, 1, 1, 1};
    CHECK(shortest_path(g, w, 0, 3).edges == std::vector<EdgeId>{0, 1});
    const auto paths = oracle::all_simple_paths(g, 0, 3);
    CHECK(shortest_path(g, w, 0, 3).edges == *std::min_element(paths.begin(), paths.end()));
}

TEST_CASE("shortest_path rejects bad input") {
    RoadGraph g(3);
    g.add_edge(0, 1);
    CHECK_THROWS_AS(shortest_path(g, std::vector<double>{1, 2}, 0, 1), ValidationError);
    CHECK_THROWS_AS(shortest_path(g, std::vector<double>{0.0}, 0, 1), ValidationError);
    CHECK_THROWS_AS(shortest_path(g, std::vector<double>{-1.0}, 0, 1), ValidationError);
    CHECK_THROWS_AS(shortest_path(g, std::vector<double>{1.0}, 0, 9), ValidationError);
    CHECK_THROWS_AS(shortest_path(g, std::vector<double>{1.0}, 0, 2), NoPathError);
    CHECK_THROWS_AS(g.add_edge(1, 1), ValidationError);
    CHECK_THROWS_AS(g.add_edge(0, 5), ValidationError);
}

TEST_CASE("path_weight") {
    const std::vector<double> w{7};
    CHECK(path_weight(Path{0, {0}}, w) == 7.0);
    CHECK(path_weight(Path{0, {}}, w) == 0.0);
    CHECK_THROWS_AS(path_weight(Path{0, {3}}, w), ValidationError);

    std::mt19937_64 rng(20);
    const auto weights = oracle::random_weights(20, 0.0, 100.0, rng);
    Path p{0, {}};
    for (EdgeId e = 0; e < 20; ++e) p.edges.push_back(e);
    double reversed = 0.0;
    for (int e = 19; e >= 0; --e) reversed += weights[e];
    CHECK(path_weight(p, weights) == doctest::Approx(reversed).epsilon(1e-12));
}

TEST_CASE("bellman_ford_path handles negative edges") {
    RoadGraph g(3);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(0, 2);
    const std::vector<double> w{4, -3, 2};
    const auto p = bellman_ford_path(g, w, 0, 2);
    REQUIRE(p.has_value());
    CHECK(p->edges == std::vector<EdgeId>{0, 1});

    RoadGraph cyc(3);
    cyc.add_edge(0, 1);
    cyc.add_edge(1, 0);
    cyc.add_edge(1, 2);
    CHECK_FALSE(bellman_ford_path(cyc, std::vector<double>{-2, 1, 1}, 0, 2).has_value());

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const RoadGraph dag = oracle::random_dag(7, 0.5, rng);
        const auto ww = oracle::random_weights(dag.num_edges(), -5.0, 10.0, rng);
        const double best = oracle::brute_force_min(dag, ww, 0, 6);
        if (std::isinf(best)) continue;
        const auto bf = bellman_ford_path(dag, ww, 0, 6);
        REQUIRE(bf.has_value());
        CHECK(path_weight(*bf, ww) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("validate_graph findings") {
    RoadGraph chain(3);
    chain.add_edge(0, 1, {100.0});
    chain.add_edge(1, 2, {100.0});
    CHECK(validate_graph(chain, 0, 2).empty());

    RoadGraph isolated(3);
    isolated.add_edge(0, 1, {100.0});
    const auto d = validate_graph(isolated, 0, 2);
    REQUIRE(d.size() == 1);
    CHECK(d[0].kind == Diagnostic::Kind::Unreachable);
    CHECK(to_string(d[0].kind) == "unreachable");

    RoadGraph negative(2);
    EdgeAttributes bad;
    bad.length_m = -5.0;
    negative.add_edge(0, 1, bad);
    const auto n = validate_graph(negative, 0, 1);
    REQUIRE(n.size() == 1);
    CHECK(n[0].kind == Diagnostic::Kind::AttributeViolation);

    const auto v = validate_graph(chain, 0, 9);
    REQUIRE_FALSE(v.empty());
    CHECK(v[0].kind == Diagnostic::Kind::BadVertex);
}

TEST_CASE("path hash is stable and sensitive to order") {
    const Path a{0, {1, 2, 3}};
    const Path b{0, {3, 2, 1}};
    CHECK(path_hash(a) == path_hash(Path{0, {1, 2, 3}}));
    CHECK(path_hash(a) != path_hash(b));
    CHECK(path_hash_hex(a).size() == 16);
}
