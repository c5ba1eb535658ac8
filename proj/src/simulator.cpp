#include "bnav/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numeric>
#include <thread>

#include "bnav/synthgen.hpp"

namespace bnav {

double expected_reward(const GroundTruth& truth, const Path& path) {
    double f = 0.0;
    for (EdgeId e : path.edges) {
        if (e >= truth.num_edges()) throw ValidationError("edge id out of range in path");
        f += truth.theta_star[e];
    }
    return f;
}

Optimum optimal_path(const Instance& instance) {
    const auto energy = instance.truth.expected_energy();
    Optimum out;
    if (std::all_of(energy.begin(), energy.end(), [](double w) { return w > 0.0; })) {
        out.path = shortest_path(*instance.graph, energy, instance.source, instance.target);
    } else if (auto exact = bellman_ford_path(*instance.graph, energy, instance.source,
                                              instance.target)) {
        out.path = std::move(*exact);
    } else {
        warn("expected edge energies contain a negative cycle; optimum computed with floored weights");
        std::vector<double> weights(energy.size());
        for (std::size_t i = 0; i < energy.size(); ++i) weights[i] = std::max(energy[i], kMinWeight);
        out.path = shortest_path(*instance.graph, weights, instance.source, instance.target);
    }
    out.reward = expected_reward(instance.truth, out.path);
    return out;
}

double RegretTrace::final_regret(std::size_t agent) const {
    for (auto it = steps.rbegin(); it != steps.rend(); ++it)
        if (it->agent == agent) return it->cumulative_regret;
    return 0.0;
}

double RegretTrace::mean_final_regret() const {
    if (agents == 0) return 0.0;
    return fleet_final_regret() / static_cast<double>(agents);
}

double RegretTrace::fleet_final_regret() const {
    double total = 0.0;
    for (std::size_t k = 0; k < agents; ++k) total += final_regret(k);
    return total;
}

std::vector<Path> RegretTrace::actions(std::size_t agent) const {
    std::vector<Path> out;
    for (const auto& s : steps)
        if (s.agent == agent) out.push_back(s.path);
    return out;
}

std::vector<double> RegretTrace::instant_regrets(std::size_t agent) const {
    std::vector<double> out;
    for (const auto& s : steps)
        if (s.agent == agent) out.push_back(s.instant_regret);
    return out;
}

namespace {

void check_instance(const Instance& instance) {
    if (!instance.graph) throw ValidationError("instance has no graph");
    const std::size_t m = instance.graph->num_edges();
    if (instance.truth.num_edges() != m || instance.prior.size() != m)
        throw ValidationError("truth, prior and graph disagree on the edge count");
}

class RegretAccount {
  public:
    RegretAccount(const Instance& instance, std::size_t agents)
        : truth_(&instance.truth), best_(optimal_path(instance).reward), cumulative_(agents, 0.0) {}

    void record(RegretTrace& trace, std::size_t t, std::size_t agent, Path path) {
        const double regret = best_ - expected_reward(*truth_, path);
        cumulative_[agent] += regret;
        trace.steps.push_back({t, agent, std::move(path), regret, cumulative_[agent]});
    }

  private:
    const GroundTruth* truth_;
    double best_;
    std::vector<double> cumulative_;
};

RegretTrace new_trace(const Instance& instance, const std::string& policy, std::size_t horizon,
                      std::size_t agents, std::uint64_t seed) {
    RegretTrace trace;
    trace.scenario = instance.scenario;
    trace.policy = policy;
    trace.seed = seed;
    trace.horizon = horizon;
    trace.agents = agents;
    trace.steps.reserve(horizon * agents);
    return trace;
}

std::vector<double> draw_rewards(const Instance& instance, const Path& path, std::uint64_t seed,
                                 std::size_t agent, std::size_t t) {
    Rng rng = make_stream(seed, Stream::Reward, agent, t);
    return sample_rewards(instance.truth, path, rng);
}

}  // namespace

RegretTrace run_single(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                       std::uint64_t seed) {
    check_instance(instance);
    RegretTrace trace = new_trace(instance, policy.name(), horizon, 1, seed);
    RegretAccount account(instance, 1);
    PolicyLearner learner(*instance.graph, instance.source, instance.target, instance.prior, policy,
                          seed, 0);
    for (std::size_t t = 1; t <= horizon; ++t) {
        Path path = learner.select();
        const auto rewards = draw_rewards(instance, path, seed, 0, t);
        learner.update(path, rewards);
        ++trace.update_events;
        account.record(trace, t, 0, std::move(path));
    }
    trace.posterior = learner.belief();
    return trace;
}

RegretTrace run_fleet(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                      std::size_t agents, std::uint64_t seed) {
    check_instance(instance);
    if (agents == 0) throw ValidationError("fleet needs at least one agent");
    RegretTrace trace = new_trace(instance, policy.name(), horizon, agents, seed);
    RegretAccount account(instance, agents);
    BeliefState belief = instance.prior;

    std::vector<Path> paths(agents);
    std::vector<std::vector<double>> rewards(agents);
    for (std::size_t t = 1; t <= horizon; ++t) {
        for (std::size_t k = 0; k < agents; ++k) {
            Rng rng = make_stream(seed, Stream::Policy, k, t);
            paths[k] = select_path(*instance.graph, belief, policy, t, instance.source,
                                   instance.target, rng);
            rewards[k] = draw_rewards(instance, paths[k], seed, k, t);
        }
        for (std::size_t k = 0; k < agents; ++k) belief.observe(paths[k].edges, rewards[k]);
        ++trace.update_events;
        for (std::size_t k = 0; k < agents; ++k) account.record(trace, t, k, std::move(paths[k]));
    }
    trace.posterior = std::move(belief);
    return trace;
}

RegretTrace run_batched(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                        std::size_t batch_size, std::uint64_t seed) {
    check_instance(instance);
    const BatchSchedule schedule(horizon, batch_size);
    RegretTrace trace = new_trace(instance, "batched-" + policy.name(), horizon, 1, seed);
    RegretAccount account(instance, 1);
    BeliefState belief = instance.prior;

    std::vector<std::pair<Path, std::vector<double>>> pending;
    for (std::size_t t = 1; t <= horizon; ++t) {
        Rng rng = make_stream(seed, Stream::Policy, 0, t);
        Path path =
            select_path(*instance.graph, belief, policy, t, instance.source, instance.target, rng);
        pending.emplace_back(path, draw_rewards(instance, path, seed, 0, t));
        if (schedule.is_boundary(t)) {
            for (const auto& [p, r] : pending) belief.observe(p.edges, r);
            pending.clear();
            ++trace.update_events;
        }
        account.record(trace, t, 0, std::move(path));
    }
    trace.posterior = std::move(belief);
    return trace;
}

RegretTrace batched_ts_run(const Instance& instance, std::size_t horizon, std::size_t batch_size,
                           std::uint64_t seed) {
    return run_batched(instance, PolicySpec{PolicyKind::Thompson, {}}, horizon, batch_size, seed);
}

RegretTrace run_delayed(const Instance& instance, const PolicySpec& policy, std::size_t horizon,
                        std::size_t delay, std::uint64_t seed) {
    check_instance(instance);
    if (delay == 0) throw ValidationError("delay must be at least 1");
    RegretTrace trace = new_trace(instance, "qpmd-" + policy.name(), horizon, 1, seed);
    RegretAccount account(instance, 1);
    PolicyLearner base(*instance.graph, instance.source, instance.target, instance.prior, policy,
                       seed, 0);
    QpmdWrapper wrapper(base);

    // Rewards in flight, indexed by the round at whose end they arrive.
    std::map<std::size_t, std::vector<std::pair<Path, TimedReward>>> in_flight;
    for (std::size_t t = 1; t <= horizon; ++t) {
        Path path = wrapper.predict();
        in_flight[t + delay - 1].emplace_back(path,
                                              TimedReward{t, draw_rewards(instance, path, seed, 0, t)});
        if (const auto it = in_flight.find(t); it != in_flight.end()) {
            for (auto& [arm, reward] : it->second) wrapper.receive(arm, std::move(reward));
            in_flight.erase(it);
        }
        account.record(trace, t, 0, std::move(path));
    }
    trace.update_events = wrapper.base_updates();
    trace.posterior = base.belief();
    return trace;
}

RegretTrace run_policy(const Instance& instance, const RunPolicy& policy, std::size_t horizon,
                       std::size_t agents, std::size_t delay, std::uint64_t seed) {
    switch (policy.mode) {
        case FeedbackMode::Online:
            if (agents == 1) return run_single(instance, policy.base, horizon, seed);
            return run_fleet(instance, policy.base, horizon, agents, seed);
        case FeedbackMode::Batched:
            return run_batched(instance, policy.base, horizon, agents, seed);
        case FeedbackMode::Delayed:
            if (agents != 1) throw ValidationError("qpmd policies run a single agent");
            return run_delayed(instance, policy.base, horizon, delay, seed);
    }
    throw ValidationError("unknown feedback mode");
}

RegretEstimate summarize(std::vector<double> finals) {
    RegretEstimate out;
    out.finals = std::move(finals);
    const double n = static_cast<double>(out.finals.size());
    if (out.finals.empty()) return out;
    out.mean = std::accumulate(out.finals.begin(), out.finals.end(), 0.0) / n;
    if (out.finals.size() > 1) {
        double ss = 0.0;
        for (double x : out.finals) ss += (x - out.mean) * (x - out.mean);
        out.sd = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

RegretEstimate bayes_regret_estimate(std::shared_ptr<const RoadGraph> graph, VertexId source,
                                     VertexId target, std::span<const GaussianBelief> prior,
                                     ModelKind model, const PolicySpec& policy,
                                     std::size_t horizon, std::size_t n_instances,
                                     std::uint64_t seed) {
    if (n_instances == 0) throw ValidationError("need at least one instance");
    std::vector<double> finals;
    finals.reserve(n_instances);
    for (std::size_t i = 0; i < n_instances; ++i) {
        Rng rng = make_stream(seed, Stream::Instance, i);
        Instance instance{graph, source, target, build_known_prior(prior, rng),
                          BeliefState::from_gaussian(model, prior), "known-prior"};
        finals.push_back(run_single(instance, policy, horizon, splitmix64(seed + i)).final_regret(0));
    }
    return summarize(std::move(finals));
}

Experiment::Experiment(ScenarioConfig config) : config_(std::move(config)) {
    config_.validate();
    const bool needs_network = std::any_of(config_.scenarios.begin(), config_.scenarios.end(),
                                           [](const std::string& s) { return s != "synthetic"; }) ||
                               !config_.truth.empty();
    if (needs_network && config_.network.empty())
        throw ValidationError("a network file is required for the configured scenarios");
    if (config_.network.empty()) return;

    network_ = std::make_shared<const Network>(load_network(config_.network));
    graph_ = std::shared_ptr<const RoadGraph>(network_, &network_->graph);
    const std::size_t n = network_->graph.num_vertices();
    if (n == 0) throw ValidationError("network has no vertices");
    if (config_.source.empty() != config_.target.empty())
        throw ValidationError("source and target must be given together");
    if (config_.source.empty()) {
        source_ = 0;
        target_ = static_cast<VertexId>(n - 1);
    } else {
        source_ = network_->vertex(config_.source);
        target_ = network_->vertex(config_.target);
    }
    if (source_ == target_) throw ValidationError("source and target coincide");
    for (const auto& d : validate_graph(network_->graph, source_, target_))
        if (d.kind == Diagnostic::Kind::Unreachable || d.kind == Diagnostic::Kind::BadVertex)
            throw NoPathError("no path: " + d.message);
}

Instance Experiment::make_instance(const std::string& scenario, std::uint64_t seed) const {
    if (scenario == "synthetic") {
        if (!config_.truth.empty()) {
            TruthFile file = load_ground_truth(config_.truth, *network_);
            return {graph_, source_, target_, std::move(file.truth),
                    BeliefState::from_gaussian(config_.model, file.prior), scenario};
        }
        SynthSpec spec = config_.synthetic.value_or(SynthSpec{});
        spec.seed = seed;
        SynthInstance synth = generate(spec);
        auto graph = std::make_shared<const RoadGraph>(std::move(synth.graph));
        return {graph, synth.source, synth.target, std::move(synth.truth),
                BeliefState::from_gaussian(config_.model, synth.prior), scenario};
    }

    const ScenarioKind kind = parse_scenario(scenario);
    if (!network_) throw ValidationError("scenario '" + scenario + "' needs a network");
    if (kind == ScenarioKind::Misspecified) {
        // The truth is a property of the network, so it does not move with the run seed.
        std::call_once(misspecified_once_, [this] {
            misspecified_ = std::make_shared<const MisspecifiedSetup>(
                build_misspecified(*graph_, config_.vehicle, config_.theta_factor,
                                   config_.noise_factor, config_.model, 0, config_.mc_samples));
        });
        return {graph_, source_, target_, misspecified_->truth, misspecified_->prior, scenario};
    }

    const auto priors =
        speed_limit_priors(*graph_, config_.vehicle, config_.theta_factor, config_.noise_factor);
    Rng rng = make_stream(seed, Stream::Instance);
    GroundTruth truth = build_known_prior(priors, rng);
    if (kind == ScenarioKind::Correlated) {
        Rng pairing = make_stream(seed, Stream::Pairing);
        truth.set_pairing(pair_edges(truth.num_edges(), pairing));
    }
    return {graph_, source_, target_, std::move(truth),
            BeliefState::from_gaussian(config_.model, priors), scenario};
}

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string run_id(const std::string& scenario, const std::string& policy, std::size_t agents,
                   std::uint64_t seed) {
    return scenario + "_" + policy + "_K" + std::to_string(agents) + "_s" + std::to_string(seed);
}

}  // namespace

void write_trace_csv(std::ostream& out, const RegretTrace& trace, bool header) {
    if (header)
        out << "run_id,scenario,policy,agent,t,path_hash,instant_regret,cumulative_regret\n";
    for (const auto& s : trace.steps) {
        out << trace.run_id << ',' << trace.scenario << ',' << trace.policy << ',' << s.agent << ','
            << s.t << ',' << path_hash_hex(s.path) << ',' << format_number(s.instant_regret) << ','
            << format_number(s.cumulative_regret) << '\n';
    }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "policy,scenario,K,avg_final_regret,sd_final_regret,n_runs\n";
    for (const auto& r : rows) {
        out << r.policy << ',' << r.scenario << ',' << r.agents << ','
            << format_number(r.estimate.mean) << ',' << format_number(r.estimate.sd) << ','
            << r.estimate.finals.size() << '\n';
    }
}

SweepReport sweep(const Experiment& experiment) {
    const ScenarioConfig& cfg = experiment.config();
    struct Cell {
        std::size_t group;
        std::string scenario;
        RunPolicy policy;
        std::size_t agents;
        std::uint64_t seed;
    };

    SweepReport report;
    std::vector<Cell> cells;
    for (const auto& scenario : cfg.scenarios)
        for (const auto& name : cfg.policies)
            for (std::size_t k : cfg.agents) {
                const RunPolicy policy = RunPolicy::parse(name);
                report.summary.push_back({policy.name(), scenario, k, {}});
                for (std::uint64_t seed : cfg.seeds)
                    cells.push_back({report.summary.size() - 1, scenario, policy, k, seed});
            }

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir / "traces");

    std::vector<std::optional<double>> finals(cells.size());
    std::vector<std::filesystem::path> files(cells.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            const std::string id = run_id(c.scenario, c.policy.name(), c.agents, c.seed);
            try {
                const Instance instance = experiment.make_instance(c.scenario, c.seed);
                RegretTrace trace =
                    run_policy(instance, c.policy, cfg.horizon, c.agents, cfg.delay, c.seed);
                trace.run_id = id;
                const auto path = out_dir / "traces" / (id + ".csv");
                std::ofstream out(path);
                if (!out) throw std::runtime_error("cannot write " + path.string());
                write_trace_csv(out, trace);
                finals[i] = trace.mean_final_regret();
                files[i] = path;
            } catch (const std::exception& ex) {
                ++failures;
                std::lock_guard lock(log_mutex);
                std::cerr << "error: run " << id << " failed: " << ex.what() << '\n';
            }
        }
    };

    const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, std::max<std::size_t>(cells.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<std::vector<double>> grouped(report.summary.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!finals[i]) continue;
        grouped[cells[i].group].push_back(*finals[i]);
        report.trace_files.push_back(files[i]);
    }
    for (std::size_t g = 0; g < grouped.size(); ++g)
        report.summary[g].estimate = summarize(std::move(grouped[g]));
    report.failures = failures;

    std::ofstream summary(out_dir / "summary.csv");
    if (!summary) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
    write_summary_csv(summary, report.summary);
    return report;
}

}  // namespace bnav
