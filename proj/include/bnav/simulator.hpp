#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "bnav/energy.hpp"
#include "bnav/environment.hpp"
#include "bnav/graph.hpp"
#include "bnav/netio.hpp"
#include "bnav/policies.hpp"

namespace bnav {

/// Everything one run needs: the graph, the hidden truth and the agent prior.
struct Instance {
    std::shared_ptr<const RoadGraph> graph;
    VertexId source = 0;
    VertexId target = 0;
    GroundTruth truth;
    BeliefState prior;
    std::string scenario;
};

struct Optimum {
    Path path;
    double reward = 0.0;  // f_theta*(a*), the sum of true mean rewards
};

/// Best path under the true expected energies. Non-positive energies switch
/// the search to Bellman-Ford; only a negative cycle falls back to flooring
/// weights at kMinWeight.
Optimum optimal_path(const Instance& instance);

/// Sum of true mean rewards over the path's edge occurrences.
double expected_reward(const GroundTruth& truth, const Path& path);

struct StepRecord {
    std::size_t t = 0;
    std::size_t agent = 0;
    Path path;
    double instant_regret = 0.0;
    double cumulative_regret = 0.0;  // per agent
};

struct RegretTrace {
    std::string run_id;
    std::string scenario;
    std::string policy;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    std::size_t agents = 1;
    std::size_t update_events = 0;  // posterior update rounds (barriers or batches)
    std::vector<StepRecord> steps;
    BeliefState posterior;  // shared belief after the last update

    double final_regret(std::size_t agent) const;
    /// Final regret averaged over agents.
    double mean_final_regret() const;
    double fleet_final_regret() const;
    std::vector<Path> actions(std::size_t agent) const;
    std::vector<double> instant_regrets(std::size_t agent) const;
};

/// The online loop: weights, shortest path, observe, conjugate update.
RegretTrace run_single(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                       std::uint64_t seed);

/// K agents select against one frozen belief per step; all observations are
/// merged at the end of the step.
RegretTrace run_fleet(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                      std::size_t agents, std::uint64_t seed);

/// Single agent whose feedback arrives in batches of `batch_size` rounds.
RegretTrace run_batched(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                        std::size_t batch_size, std::uint64_t seed);
RegretTrace batched_ts_run(const Instance& instance, std::size_t horizon, std::size_t batch_size,
                           std::uint64_t seed);

/// Base policy wrapped in the queued delayed-feedback scheme. The reward of
/// round s is delivered at the end of round s + delay - 1.
RegretTrace run_delayed(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                        std::size_t delay, std::uint64_t seed);

/// Dispatch on the feedback mode; `agents` is the fleet size or batch size.
RegretTrace run_policy(const Instance& instance, const RunPolicy& policy, std::size_t horizon,
                       std::size_t agents, std::size_t delay, std::uint64_t seed);

struct RegretEstimate {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation, 0 for a single instance
    std::vector<double> finals;
};

RegretEstimate summarize(std::vector<double> finals);

/// Bayesian regret: instances drawn from the prior, one run each.
RegretEstimate bayes_regret_estimate(std::shared_ptr<const RoadGraph> graph, VertexId source,
                                     VertexId target, std::span<const GaussianBelief> prior,
                                     ModelKind model, const PolicySpec& policy,
                                     std::size_t horizon, std::size_t n_instances,
                                     std::uint64_t seed);

/// Instance factory for one experiment description.
class Experiment {
  public:
    /// Loads the network (unless the scenario list is purely synthetic) and
    /// resolves source and target.
    explicit Experiment(ScenarioConfig config);

    const ScenarioConfig& config() const { return config_; }
    /// Loaded network, or null when only synthetic scenarios are configured.
    const Network* network() const { return network_.get(); }

    /// Known-prior and correlated instances with the same seed share theta*.
    /// Misspecified truth is fixed across seeds.
    Instance make_instance(const std::string& scenario, std::uint64_t seed) const;

  private:
    ScenarioConfig config_;
    std::shared_ptr<const Network> network_;
    std::shared_ptr<const RoadGraph> graph_;
    VertexId source_ = 0, target_ = 0;
    mutable std::once_flag misspecified_once_;
    mutable std::shared_ptr<const MisspecifiedSetup> misspecified_;
};

void write_trace_csv(std::ostream& out, const RegretTrace& trace, bool header = true);

struct SummaryRow {
    std::string policy, scenario;
    std::size_t agents = 1;
    RegretEstimate estimate;
};

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

struct SweepReport {
    std::vector<SummaryRow> summary;
    std::vector<std::filesystem::path> trace_files;
    std::size_t failures = 0;
};

/// Runs every scenario x policy x K x seed cell, writing traces/<run_id>.csv
/// and summary.csv under the output directory. Failed cells are reported and
/// skipped.
SweepReport sweep(const Experiment& experiment);

}  // namespace bnav
