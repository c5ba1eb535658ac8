#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnav/netio.hpp"
#include "bnav/simulator.hpp"
#include "bnav/synthgen.hpp"

namespace {

using namespace bnav;

// Flags shared by run and sweep; unset flags leave the config untouched.
struct RunFlags {
    std::string config;
    std::string network;
    std::string truth;
    std::string out;
    std::vector<std::string> scenarios;
    std::vector<std::string> policies;
    std::string model;
    std::vector<std::uint64_t> seeds;
    std::optional<std::size_t> horizon;
    std::vector<std::size_t> agents;
    std::optional<std::size_t> delay;
    std::optional<std::size_t> jobs;
    std::string source, target;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--network", f.network, "edge CSV");
    cmd->add_option("--truth", f.truth, "ground-truth CSV for the synthetic scenario");
    cmd->add_option("--out", f.out, "output directory");
    cmd->add_option("--scenario", f.scenarios, "misspecified, known-prior, correlated or synthetic");
    cmd->add_option("--policy", f.policies, "policy name");
    cmd->add_option("--model", f.model, "rectified or log-gaussian");
    cmd->add_option("--seed", f.seeds, "run seed");
    cmd->add_option("--T", f.horizon, "horizon");
    cmd->add_option("--K", f.agents, "fleet size, or batch size for batched policies");
    cmd->add_option("--delay", f.delay, "feedback delay for qpmd policies");
    cmd->add_option("--jobs", f.jobs, "parallel sweep cells (default $BANDIT_NAV_JOBS or 1)");
    cmd->add_option("--source", f.source, "source vertex name");
    cmd->add_option("--target", f.target, "target vertex name");
}

std::size_t env_jobs() {
    const char* env = std::getenv("BANDIT_NAV_JOBS");
    if (!env || !*env) return 0;
    try {
        std::size_t used = 0;
        const long v = std::stol(env, &used);
        if (used == std::string(env).size() && v > 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    warn(std::string("ignoring invalid BANDIT_NAV_JOBS='") + env + "'");
    return 0;
}

ScenarioConfig effective_config(const RunFlags& f) {
    ScenarioConfig c = f.config.empty() ? ScenarioConfig{} : load_config(f.config);
    if (!f.network.empty()) c.network = f.network;
    if (!f.truth.empty()) c.truth = f.truth;
    if (!f.out.empty()) c.output_dir = f.out;
    if (!f.scenarios.empty()) c.scenarios = f.scenarios;
    if (!f.policies.empty()) c.policies = f.policies;
    if (!f.model.empty()) c.model = parse_model(f.model);
    if (!f.seeds.empty()) c.seeds = f.seeds;
    if (f.horizon) c.horizon = *f.horizon;
    if (!f.agents.empty()) c.agents = f.agents;
    if (f.delay) c.delay = *f.delay;
    if (f.jobs) {
        c.jobs = *f.jobs;
    } else if (const std::size_t j = env_jobs(); j > 0) {
        c.jobs = j;
    }
    if (!f.source.empty()) c.source = f.source;
    if (!f.target.empty()) c.target = f.target;
    // A config round trip applies the same strict checks as a file would.
    return parse_config(dump_config(c));
}

void echo_config(const ScenarioConfig& c) {
    std::filesystem::create_directories(c.output_dir);
    std::ofstream out(std::filesystem::path(c.output_dir) / "config.json");
    if (!out) throw std::runtime_error("cannot write config.json in " + c.output_dir);
    out << dump_config(c) << '\n';
}

int cmd_run(const RunFlags& flags) {
    const ScenarioConfig cfg = effective_config(flags);
    if (cfg.scenarios.size() != 1 || cfg.policies.size() != 1 || cfg.agents.size() != 1 ||
        cfg.seeds.size() != 1)
        throw ValidationError("run takes exactly one scenario, policy, K and seed; use sweep for grids");
    const Experiment experiment(cfg);
    echo_config(cfg);

    const RunPolicy policy = RunPolicy::parse(cfg.policies.front());
    const std::uint64_t seed = cfg.seeds.front();
    const Instance instance = experiment.make_instance(cfg.scenarios.front(), seed);
    RegretTrace trace =
        run_policy(instance, policy, cfg.horizon, cfg.agents.front(), cfg.delay, seed);
    trace.run_id = cfg.scenarios.front() + "_" + policy.name() + "_K" +
                   std::to_string(cfg.agents.front()) + "_s" + std::to_string(seed);

    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir / "traces");
    {
        std::ofstream out(dir / "traces" / (trace.run_id + ".csv"));
        if (!out) throw std::runtime_error("cannot write trace for " + trace.run_id);
        write_trace_csv(out, trace);
    }
    {
        std::ofstream out(dir / "summary.csv");
        if (!out) throw std::runtime_error("cannot write summary.csv");
        write_summary_csv(out, {{policy.name(), cfg.scenarios.front(), cfg.agents.front(),
                                 summarize({trace.mean_final_regret()})}});
    }
    std::cout << trace.run_id << " final_regret=" << trace.mean_final_regret() << '\n';
    return 0;
}

int cmd_sweep(const RunFlags& flags) {
    const ScenarioConfig cfg = effective_config(flags);
    const Experiment experiment(cfg);
    echo_config(cfg);
    const SweepReport report = sweep(experiment);
    for (const auto& row : report.summary)
        std::cout << row.scenario << ' ' << row.policy << " K=" << row.agents
                  << " mean_final_regret=" << row.estimate.mean << " sd=" << row.estimate.sd
                  << " runs=" << row.estimate.finals.size() << '\n';
    std::cout << report.trace_files.size() << " traces written to " << cfg.output_dir << '\n';
    if (report.failures > 0) {
        std::cerr << "error: " << report.failures << " run(s) failed\n";
        return 2;
    }
    return 0;
}

int cmd_gen_synth(const SynthSpec& spec, const std::string& out_dir) {
    const SynthInstance synth = generate(spec);
    const Network net = make_network(synth.graph);
    const std::filesystem::path dir(out_dir);
    save_network(dir / "network.csv", net);
    save_ground_truth(dir / "ground_truth.csv", net, synth.truth, synth.prior);
    std::cout << "wrote " << (dir / "network.csv").string() << " and "
              << (dir / "ground_truth.csv").string() << " (" << net.graph.num_vertices()
              << " vertices, " << net.graph.num_edges() << " edges)\n";
    return 0;
}

int cmd_validate(const std::string& network, const std::string& source,
                 const std::string& target) {
    const Network net = load_network(network);
    const std::size_t n = net.graph.num_vertices();
    if (n == 0) throw ValidationError("network has no vertices");
    const VertexId s = source.empty() ? 0 : net.vertex(source);
    const VertexId t = target.empty() ? static_cast<VertexId>(n - 1) : net.vertex(target);
    const auto diagnostics = validate_graph(net.graph, s, t);
    for (const auto& d : diagnostics) std::cout << to_string(d.kind) << ": " << d.message << '\n';
    if (diagnostics.empty()) {
        std::cout << "ok: " << n << " vertices, " << net.graph.num_edges() << " edges, "
                  << net.vertex_names[t] << " reachable from " << net.vertex_names[s] << '\n';
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Energy-efficient navigation with online bandit learning"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "suppress warnings");

    RunFlags run_flags, sweep_flags;
    auto* run = app.add_subcommand("run", "single run, one trace");
    add_run_flags(run, run_flags);
    auto* sweep_cmd = app.add_subcommand("sweep", "scenario x policy x K x seed grid");
    add_run_flags(sweep_cmd, sweep_flags);

    SynthSpec synth;
    std::string synth_out = ".";
    auto* gen = app.add_subcommand("gen-synth", "write a synthetic network and its ground truth");
    gen->add_option("--n", synth.n, "vertices")->required();
    gen->add_option("--o", synth.o, "edges")->required();
    gen->add_option("--seed", synth.seed, "instance seed");
    gen->add_option("--out", synth_out, "output directory");

    std::string val_network, val_source, val_target;
    auto* val = app.add_subcommand("validate", "check a network file");
    val->add_option("--network", val_network, "edge CSV")->required();
    val->add_option("--source", val_source, "source vertex name");
    val->add_option("--target", val_target, "target vertex name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    set_warnings_enabled(!quiet);

    try {
        if (*run) return cmd_run(run_flags);
        if (*sweep_cmd) return cmd_sweep(sweep_flags);
        if (*gen) return cmd_gen_synth(synth, synth_out);
        if (*val) return cmd_validate(val_network, val_source, val_target);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NoPathError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
