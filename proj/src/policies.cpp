#include "bnav/policies.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace bnav {

double EpsSchedule::at(std::size_t t) const {
    if (decaying) return 1.0 / static_cast<double>(std::max<std::size_t>(t, 1));
    return value;
}

std::string PolicySpec::name() const {
    switch (kind) {
        case PolicyKind::Greedy: return "greedy";
        case PolicyKind::Thompson: return "ts";
        case PolicyKind::BayesUcb: return "bayes-ucb";
        case PolicyKind::EpsGreedy: {
            if (eps.decaying) return "eps-greedy-decay";
            std::ostringstream os;
            os << "eps-greedy-" << eps.value;
            return os.str();
        }
    }
    return "unknown";
}

PolicySpec PolicySpec::parse(const std::string& name) {
    PolicySpec spec;
    if (name == "greedy") {
        spec.kind = PolicyKind::Greedy;
    } else if (name == "ts") {
        spec.kind = PolicyKind::Thompson;
    } else if (name == "bayes-ucb") {
        spec.kind = PolicyKind::BayesUcb;
    } else if (name == "eps-greedy-decay") {
        spec.kind = PolicyKind::EpsGreedy;
        spec.eps.decaying = true;
    } else if (name.starts_with("eps-greedy-")) {
        spec.kind = PolicyKind::EpsGreedy;
        const std::string value = name.substr(11);
        double eps = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), eps);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !(eps >= 0.0 && eps <= 1.0))
            throw ValidationError("invalid exploration probability in policy '" + name + "'");
        spec.eps.value = eps;
    } else {
        throw ValidationError("unknown policy '" + name + "'");
    }
    return spec;
}

std::string RunPolicy::name() const {
    switch (mode) {
        case FeedbackMode::Online: return base.name();
        case FeedbackMode::Batched: return "batched-" + base.name();
        case FeedbackMode::Delayed: return "qpmd-" + base.name();
    }
    return base.name();
}

RunPolicy RunPolicy::parse(const std::string& name) {
    if (name.starts_with("batched-"))
        return {PolicySpec::parse(name.substr(8)), FeedbackMode::Batched};
    if (name.starts_with("qpmd-")) return {PolicySpec::parse(name.substr(5)), FeedbackMode::Delayed};
    return {PolicySpec::parse(name), FeedbackMode::Online};
}

namespace {

double floor_weight(double w) { return std::max(w, kMinWeight); }

}  // namespace

std::vector<double> greedy_weights(const BeliefState& belief) {
    std::vector<double> w(belief.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto e = static_cast<EdgeId>(i);
        w[i] = floor_weight(belief_to_weight(belief.mean_reward(e), belief.kind(), belief.noise_std(e)));
    }
    return w;
}

std::vector<double> ts_weights(const BeliefState& belief, Rng& rng) {
    std::normal_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(belief.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto e = static_cast<EdgeId>(i);
        double theta;
        if (belief.kind() == ModelKind::RectifiedGaussian) {
            const auto& b = belief.gaussian(e);
            theta = b.mu + std::sqrt(b.var) * unit(rng);
        } else {
            const auto& b = belief.log_gaussian(e);
            theta = -std::exp(b.log_mu + std::sqrt(b.log_var) * unit(rng));
        }
        w[i] = floor_weight(belief_to_weight(theta, belief.kind(), belief.noise_std(e)));
    }
    return w;
}

double bayesucb_level(std::size_t t) {
    if (t == 0) throw ValidationError("rounds are numbered from 1");
    return 1.0 / (static_cast<double>(t) + 1.0);
}

std::vector<double> bayesucb_weights(const BeliefState& belief, std::size_t t) {
    // Lower quantile of the energy; z < 0 for every t >= 1.
    const double z = normal_quantile(bayesucb_level(t));
    std::vector<double> w(belief.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto e = static_cast<EdgeId>(i);
        double theta;
        if (belief.kind() == ModelKind::RectifiedGaussian) {
            const auto& b = belief.gaussian(e);
            theta = -(-b.mu + std::sqrt(b.var) * z);
        } else {
            const auto& b = belief.log_gaussian(e);
            theta = -std::exp(b.log_mu + std::sqrt(b.log_var) * z);
        }
        w[i] = floor_weight(belief_to_weight(theta, belief.kind(), belief.noise_std(e)));
    }
    return w;
}

std::optional<Path> path_through_edge(const RoadGraph& graph, std::span<const double> weights,
                                      EdgeId e, VertexId source, VertexId target) {
    const Edge& edge = graph.edge(e);
    try {
        Path out{source, {}};
        if (edge.from != source) out = shortest_path(graph, weights, source, edge.from);
        out.edges.push_back(e);
        if (edge.to != target) {
            const Path tail = shortest_path(graph, weights, edge.to, target);
            out.edges.insert(out.edges.end(), tail.edges.begin(), tail.edges.end());
        }
        return out;
    } catch (const NoPathError&) {
        return std::nullopt;
    }
}

Path eps_greedy_select(const RoadGraph& graph, const BeliefState& belief, std::size_t t,
                       const EpsSchedule& schedule, VertexId source, VertexId target, Rng& rng) {
    const double eps = schedule.at(t);
    if (!(eps >= 0.0 && eps <= 1.0)) throw ValidationError("exploration probability outside [0, 1]");
    const auto weights = greedy_weights(belief);

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (graph.num_edges() == 0 || !(coin(rng) < eps))
        return shortest_path(graph, weights, source, target);

    constexpr int kMaxTries = 32;
    std::uniform_int_distribution<EdgeId> pick(0, static_cast<EdgeId>(graph.num_edges() - 1));
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
        if (auto walk = path_through_edge(graph, weights, pick(rng), source, target)) return *walk;
    }
    warn("eps-greedy: no sampled edge lies on a source-target walk, playing greedy");
    return shortest_path(graph, weights, source, target);
}

Path select_path(const RoadGraph& graph, const BeliefState& belief, const PolicySpec& policy,
                 std::size_t t, VertexId source, VertexId target, Rng& rng) {
    switch (policy.kind) {
        case PolicyKind::Greedy:
            return shortest_path(graph, greedy_weights(belief), source, target);
        case PolicyKind::Thompson:
            return shortest_path(graph, ts_weights(belief, rng), source, target);
        case PolicyKind::BayesUcb:
            return shortest_path(graph, bayesucb_weights(belief, t), source, target);
        case PolicyKind::EpsGreedy:
            return eps_greedy_select(graph, belief, t, policy.eps, source, target, rng);
    }
    throw ValidationError("unknown policy kind");
}

PolicyLearner::PolicyLearner(const RoadGraph& graph, VertexId source, VertexId target,
                             BeliefState belief, PolicySpec policy, std::uint64_t seed,
                             std::uint64_t agent)
    : graph_(&graph),
      source_(source),
      target_(target),
      belief_(std::move(belief)),
      policy_(policy),
      seed_(seed),
      agent_(agent) {}

Path PolicyLearner::select() {
    ++round_;
    Rng rng = make_stream(seed_, Stream::Policy, agent_, round_);
    return select_path(*graph_, belief_, policy_, round_, source_, target_, rng);
}

void PolicyLearner::update(const Path& path, std::span<const double> rewards) {
    belief_.observe(path.edges, rewards);
}

void FeedbackQueue::push(const Path& arm, TimedReward reward) {
    queues_[arm.edges].push_back(std::move(reward));
}

bool FeedbackQueue::empty(const Path& arm) const { return size(arm) == 0; }

std::size_t FeedbackQueue::size(const Path& arm) const {
    const auto it = queues_.find(arm.edges);
    return it == queues_.end() ? 0 : it->second.size();
}

std::size_t FeedbackQueue::total() const {
    std::size_t n = 0;
    for (const auto& [_, q] : queues_) n += q.size();
    return n;
}

TimedReward FeedbackQueue::pop(const Path& arm) {
    const auto it = queues_.find(arm.edges);
    if (it == queues_.end() || it->second.empty())
        throw ValidationError("pop from an empty feedback queue");
    TimedReward out = std::move(it->second.front());
    it->second.pop_front();
    if (it->second.empty()) queues_.erase(it);
    return out;
}

Path QpmdWrapper::predict() {
    if (!pending_) pending_ = base_->select();
    while (!queues_.empty(*pending_)) {
        const TimedReward r = queues_.pop(*pending_);
        base_->update(*pending_, r.rewards);
        ++base_updates_;
        pending_ = base_->select();
    }
    return *pending_;
}

void QpmdWrapper::receive(const Path& arm, TimedReward reward) {
    if (reward.rewards.size() != arm.edges.size())
        throw ValidationError("reward vector does not match the played arm");
    queues_.push(arm, std::move(reward));
}

BatchSchedule::BatchSchedule(std::size_t horizon_, std::size_t batch_size_)
    : horizon(horizon_), batch_size(batch_size_) {
    if (batch_size == 0) throw ValidationError("batch size must be at least 1");
    if (horizon % batch_size != 0)
        throw ValidationError("batch size " + std::to_string(batch_size) +
                              " does not divide horizon " + std::to_string(horizon));
}

}  // namespace bnav
