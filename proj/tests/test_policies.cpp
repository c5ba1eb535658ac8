#include <algorithm>
#include <cmath>

#include "bnav/policies.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bnav;

namespace {

// Standard normal quantile by bisection on erfc, independent of the library.
double quantile_oracle(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

RoadGraph diamond() {
    RoadGraph g(4);
    g.add_edge(0, 1);  // 0
    g.add_edge(1, 3);  // 1
    g.add_edge(0, 2);  // 2
    g.add_edge(2, 3);  // 3
    g.add_edge(1, 2);  // 4
    return g;
}

BeliefState tight(std::vector<double> energies, double var = 1e-6) {
    std::vector<GaussianBelief> b;
    for (double e : energies) b.push_back({-e, var, 1e-6});
    return BeliefState::rectified(b);
}

// Replays a fixed list of proposals and records updates.
class ScriptedLearner : public Learner {
  public:
    explicit ScriptedLearner(std::vector<Path> script) : script_(std::move(script)) {}
    Path select() override { return script_.at(next_++); }
    void update(const Path& path, std::span<const double> rewards) override {
        updates.emplace_back(path, std::vector<double>(rewards.begin(), rewards.end()));
    }
    std::vector<std::pair<Path, std::vector<double>>> updates;
    std::size_t selects() const { return next_; }

  private:
    std::vector<Path> script_;
    std::size_t next_ = 0;
};

}  // namespace

TEST_CASE("policy names round trip") {
    for (const char* name : {"greedy", "ts", "bayes-ucb", "eps-greedy-decay", "eps-greedy-0.1",
                             "eps-greedy-0.5"})
        CHECK(PolicySpec::parse(name).name() == name);
    CHECK(RunPolicy::parse("batched-ts").mode == FeedbackMode::Batched);
    CHECK(RunPolicy::parse("qpmd-bayes-ucb").name() == "qpmd-bayes-ucb");
    CHECK_THROWS_AS(PolicySpec::parse("ucb1"), ValidationError);
    CHECK_THROWS_AS(PolicySpec::parse("eps-greedy-1.5"), ValidationError);
    CHECK_THROWS_AS(PolicySpec::parse("eps-greedy-x"), ValidationError);
}

TEST_CASE("greedy weights") {
    const auto rect = BeliefState::rectified({{-10.0, 4.0, 0.01}});
    const auto mc = oracle::mc_rectified(10.0, 0.1, 1'000'000, 9);
    CHECK(std::abs(greedy_weights(rect)[0] - mc.mean) < 3.0 * mc.se + 1e-9);
    CHECK(greedy_weights(rect)[0] == doctest::Approx(10.0));

    // Posterior mean of the energy is 42 when exp(log_mu + log_var / 2) = 42.
    const double log_var = 0.2;
    const auto logb =
        BeliefState::log_gaussian({{std::log(42.0) - log_var / 2.0, log_var, 0.01, -42.0}});
    CHECK(greedy_weights(logb)[0] == doctest::Approx(42.0).epsilon(1e-12));

    CHECK(greedy_weights(rect) == greedy_weights(rect));
}

TEST_CASE("thompson weights") {
    const BeliefState b = BeliefState::rectified({{-10.0, 4.0, 1.0}, {-20.0, 9.0, 1.0}});
    Rng a = make_stream(5, Stream::Policy, 0, 1);
    Rng c = make_stream(5, Stream::Policy, 0, 1);
    CHECK(ts_weights(b, a) == ts_weights(b, c));
    for (double w : ts_weights(b, a)) CHECK(w >= kMinWeight);

    const auto t = tight({3.0, 7.0, 2.0, 9.0, 4.0});
    Rng r = make_stream(1, Stream::Policy);
    const auto ts = ts_weights(t, r);
    const auto gr = greedy_weights(t);
    for (std::size_t i = 0; i < ts.size(); ++i) CHECK(ts[i] == doctest::Approx(gr[i]).epsilon(1e-3));
    const RoadGraph g = diamond();
    CHECK(shortest_path(g, ts, 0, 3) == shortest_path(g, gr, 0, 3));
}

TEST_CASE("thompson samples match the posterior") {
    const BeliefState b = BeliefState::rectified({{-100.0, 25.0, 1e-6}});
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        Rng r = make_stream(3, Stream::Policy, 0, i);
        const double w = ts_weights(b, r)[0];
        s += w;
        s2 += w * w;
    }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(mean == doctest::Approx(100.0).epsilon(0.002));
    CHECK(sd == doctest::Approx(5.0).epsilon(0.05));
}

TEST_CASE("bayes-ucb weights") {
    CHECK(bayesucb_level(1) == 0.5);
    CHECK_THROWS_AS(bayesucb_level(0), ValidationError);

    const BeliefState b = BeliefState::rectified({{-100.0, 100.0, 1e-6}});
    CHECK(bayesucb_weights(b, 1)[0] == doctest::Approx(100.0).epsilon(1e-9));

    // t = 43 gives level 1/44; the lower energy quantile is 100 + 10 z.
    const double z = quantile_oracle(1.0 / 44.0);
    CHECK(bayesucb_weights(b, 43)[0] == doctest::Approx(100.0 + 10.0 * z).epsilon(1e-9));
    CHECK(quantile_oracle(0.02275) == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(100.0 + 10.0 * normal_quantile(0.02275) == doctest::Approx(80.0).epsilon(1e-3));

    double prev = bayesucb_weights(b, 1)[0];
    for (std::size_t t = 2; t < 5000; t += 37) {
        const double w = bayesucb_weights(b, t)[0];
        CHECK(w <= prev);
        prev = w;
    }

    const auto t = tight({3.0, 7.0, 2.0, 9.0, 4.0});
    const RoadGraph g = diamond();
    CHECK(shortest_path(g, bayesucb_weights(t, 1000), 0, 3) ==
          shortest_path(g, greedy_weights(t), 0, 3));

    const auto logb = BeliefState::log_gaussian({{std::log(50.0), 0.04, 0.01, -50.0}});
    CHECK(bayesucb_weights(logb, 1)[0] == doctest::Approx(50.0).epsilon(1e-12));
    CHECK(bayesucb_weights(logb, 99)[0] < 50.0);
}

TEST_CASE("eps-greedy") {
    const RoadGraph g = diamond();
    const auto b = tight({1.0, 1.0, 5.0, 5.0, 5.0});
    const Path greedy = shortest_path(g, greedy_weights(b), 0, 3);
    for (std::uint64_t s = 0; s < 50; ++s) {
        Rng r = make_stream(s, Stream::Policy);
        CHECK(eps_greedy_select(g, b, 1, {false, 0.0}, 0, 3, r) == greedy);
    }

    std::vector<bool> seen(g.num_edges(), false);
    for (std::uint64_t s = 0; s < 200; ++s) {
        Rng r = make_stream(s, Stream::Policy);
        const Path p = eps_greedy_select(g, b, 1, {false, 1.0}, 0, 3, r);
        CHECK(p.source == 0);
        CHECK(is_connected(g, p));
        CHECK(p.vertices(g).back() == 3);
        for (EdgeId e : p.edges) seen[e] = true;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](bool x) { return x; }));

    CHECK(EpsSchedule{true, 0.0}.at(1) == 1.0);
    CHECK(EpsSchedule{true, 0.0}.at(4) == 0.25);
}

TEST_CASE("forced exploration matches the constrained brute-force walk") {
    // Chain 0-1-2-3-4 plus shortcut 1->3.
    RoadGraph g(5);
    for (VertexId v = 0; v < 4; ++v) g.add_edge(v, v + 1);
    const EdgeId shortcut = g.add_edge(1, 3);
    const std::vector<double> w{1.0, 1.0, 1.0, 1.0, 5.0};

    const auto walk = path_through_edge(g, w, shortcut, 0, 4);
    REQUIRE(walk.has_value());
    const auto paths = oracle::all_simple_paths(g, 0, 4);
    double best = std::numeric_limits<double>::infinity();
    std::vector<EdgeId> arg;
    for (const auto& p : paths)
        if (std::find(p.begin(), p.end(), shortcut) != p.end() && oracle::cost(p, w) < best) {
            best = oracle::cost(p, w);
            arg = p;
        }
    CHECK(walk->edges == arg);
    CHECK(path_weight(*walk, w) == best);

    RoadGraph dead(3);
    dead.add_edge(0, 2);
    const EdgeId back = dead.add_edge(2, 1);
    CHECK_FALSE(path_through_edge(dead, std::vector<double>{1, 1}, back, 0, 2).has_value());
}

TEST_CASE("feedback queue is FIFO per arm") {
    FeedbackQueue q;
    const Path a{0, {0}}, b{0, {1}};
    Rng rng(17);
    std::bernoulli_distribution coin(0.5);
    std::size_t step = 0;
    for (int i = 0; i < 200; ++i) {
        if (coin(rng) || q.total() == 0) {
            q.push(coin(rng) ? a : b, {++step, {1.0}});
        } else {
            for (const Path* arm : {&a, &b}) {
                if (q.empty(*arm)) continue;
                const auto first = q.pop(*arm);
                if (!q.empty(*arm)) CHECK(q.pop(*arm).step > first.step);
                break;
            }
        }
    }
    CHECK_THROWS_AS(FeedbackQueue{}.pop(a), ValidationError);
}

TEST_CASE("qpmd wrapper hand trace") {
    const Path A{0, {0}}, B{0, {1}};
    ScriptedLearner base({A, A, B, A, B});
    QpmdWrapper wrapper(base);

    // Rounds 1-3: no feedback yet, the pending arm is replayed.
    for (int t = 1; t <= 3; ++t) CHECK(wrapper.predict() == A);
    CHECK(base.selects() == 1);
    for (std::size_t s = 1; s <= 3; ++s) wrapper.receive(A, {s, {-static_cast<double>(s)}});
    CHECK(wrapper.queues().size(A) == 3);

    // Round 4: consumes r1 (base proposes A again), r2 (base proposes B).
    CHECK(wrapper.predict() == B);
    CHECK(wrapper.queues().size(A) == 1);
    REQUIRE(base.updates.size() == 2);
    CHECK(base.updates[0].second == std::vector<double>{-1.0});
    CHECK(base.updates[1].second == std::vector<double>{-2.0});

    // Round 5: nothing for B yet.
    CHECK(wrapper.predict() == B);
    CHECK(base.selects() == 3);

    // B's reward arrives; base moves to A, which still has r3 queued, then to B.
    wrapper.receive(B, {4, {-4.0}});
    CHECK(wrapper.predict() == B);
    REQUIRE(base.updates.size() == 4);
    CHECK(base.updates[2].first == B);
    CHECK(base.updates[3].first == A);
    CHECK(base.updates[3].second == std::vector<double>{-3.0});
    CHECK(wrapper.base_updates() == 4);
    CHECK(wrapper.queues().total() == 0);

    CHECK_THROWS_AS(wrapper.receive(A, {9, {1.0, 2.0}}), ValidationError);
}

TEST_CASE("batch schedule") {
    const BatchSchedule s(20, 5);
    CHECK(s.num_batches() == 4);
    int boundaries = 0;
    for (std::size_t t = 1; t <= 20; ++t) boundaries += s.is_boundary(t);
    CHECK(boundaries == 4);
    CHECK_THROWS_AS(BatchSchedule(20, 3), ValidationError);
    CHECK_THROWS_AS(BatchSchedule(20, 0), ValidationError);
}

TEST_CASE("policy learner streams are reproducible") {
    const RoadGraph g = diamond();
    const BeliefState b = BeliefState::rectified(std::vector<GaussianBelief>(5, {-5.0, 4.0, 1.0}));
    PolicyLearner x(g, 0, 3, b, PolicySpec::parse("ts"), 42);
    PolicyLearner y(g, 0, 3, b, PolicySpec::parse("ts"), 42);
    for (int i = 0; i < 20; ++i) CHECK(x.select() == y.select());
    CHECK(x.rounds() == 20);
}
