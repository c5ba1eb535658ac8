#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnav/energy.hpp"
#include "bnav/graph.hpp"

namespace bnav {

// Lower bound applied to every policy weight so Dijkstra sees strictly
// positive costs even when a rectified mean underflows to zero.
inline constexpr double kMinWeight = 1e-9;

enum class PolicyKind { Greedy, Thompson, BayesUcb, EpsGreedy };

/// Exploration probability per round: constant, or 1/t.
struct EpsSchedule {
    bool decaying = false;
    double value = 0.1;

    double at(std::size_t t) const;
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::Thompson;
    EpsSchedule eps;

    /// Canonical name: greedy, ts, bayes-ucb, eps-greedy-<value>, eps-greedy-decay.
    std::string name() const;
    static PolicySpec parse(const std::string& name);
};

/// How feedback reaches the learner.
enum class FeedbackMode {
    Online,   // after every round
    Batched,  // at batch boundaries
    Delayed,  // through the queued delayed-feedback wrapper
};

/// A base policy plus its feedback mode, named `<base>`, `batched-<base>` or
/// `qpmd-<base>`.
struct RunPolicy {
    PolicySpec base;
    FeedbackMode mode = FeedbackMode::Online;

    std::string name() const;
    static RunPolicy parse(const std::string& name);
};

std::vector<double> greedy_weights(const BeliefState& belief);
std::vector<double> ts_weights(const BeliefState& belief, Rng& rng);
/// Optimistic weights from the lower energy quantile at level 1/(t+1).
std::vector<double> bayesucb_weights(const BeliefState& belief, std::size_t t);
/// Quantile level used by bayesucb_weights at round t >= 1.
double bayesucb_level(std::size_t t);

/// Shortest source-target walk forced through edge e: the shortest path to
/// its tail, the edge, then the shortest path from its head. nullopt when
/// either segment does not exist.
std::optional<Path> path_through_edge(const RoadGraph& graph, std::span<const double> weights,
                                      EdgeId e, VertexId source, VertexId target);

/// With probability eps(t) explores through a uniformly sampled edge,
/// otherwise plays the greedy path. Exploration segments are shortest paths
/// under the greedy weights.
Path eps_greedy_select(const RoadGraph& graph, const BeliefState& belief, std::size_t t,
                       const EpsSchedule& schedule, VertexId source, VertexId target, Rng& rng);

/// One path choice for round t (1-based).
Path select_path(const RoadGraph& graph, const BeliefState& belief, const PolicySpec& policy,
                 std::size_t t, VertexId source, VertexId target, Rng& rng);

/// A sequential bandit learner: proposes super-arms, absorbs one reward
/// vector at a time.
class Learner {
  public:
    virtual ~Learner() = default;
    virtual Path select() = 0;
    virtual void update(const Path& path, std::span<const double> rewards) = 0;
};

/// Algorithm-1 agent: policy weights, shortest path, conjugate update. Its
/// round counter advances with every select(); the random stream for round t
/// is derived from (seed, agent, t).
class PolicyLearner : public Learner {
  public:
    PolicyLearner(const RoadGraph& graph, VertexId source, VertexId target, BeliefState belief,
                  PolicySpec policy, std::uint64_t seed, std::uint64_t agent = 0);

    Path select() override;
    void update(const Path& path, std::span<const double> rewards) override;

    const BeliefState& belief() const { return belief_; }
    std::size_t rounds() const { return round_; }

  private:
    const RoadGraph* graph_;
    VertexId source_, target_;
    BeliefState belief_;
    PolicySpec policy_;
    std::uint64_t seed_, agent_;
    std::size_t round_ = 0;
};

struct TimedReward {
    std::size_t step = 0;  // round the arm was played
    std::vector<double> rewards;
};

/// Per-super-arm FIFO of rewards that arrived but have not been consumed.
/// Keys are exact edge-id sequences.
class FeedbackQueue {
  public:
    void push(const Path& arm, TimedReward reward);
    bool empty(const Path& arm) const;
    std::size_t size(const Path& arm) const;
    std::size_t total() const;
    TimedReward pop(const Path& arm);

  private:
    std::map<std::vector<EdgeId>, std::deque<TimedReward>> queues_;
};

/// Queued partial monitoring with delays around a non-delayed learner.
class QpmdWrapper {
  public:
    explicit QpmdWrapper(Learner& base) : base_(&base) {}

    /// Consumes queued rewards for the base learner's proposal until it
    /// proposes an arm with an empty queue, then returns that arm.
    Path predict();

    /// Stores delivered rewards; `arm` is the super-arm played at reward.step.
    void receive(const Path& arm, TimedReward reward);

    const FeedbackQueue& queues() const { return queues_; }
    std::size_t base_updates() const { return base_updates_; }

  private:
    Learner* base_;
    FeedbackQueue queues_;
    std::optional<Path> pending_;
    std::size_t base_updates_ = 0;
};

/// Rounds grouped into batches of K; posterior updates only at t = bK.
struct BatchSchedule {
    std::size_t horizon = 0;
    std::size_t batch_size = 1;

    BatchSchedule(std::size_t horizon, std::size_t batch_size);
    std::size_t num_batches() const { return horizon / batch_size; }
    bool is_boundary(std::size_t t) const { return t % batch_size == 0; }
};

}  // namespace bnav
