#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bnav/energy.hpp"
#include "bnav/environment.hpp"
#include "bnav/graph.hpp"
#include "bnav/synthgen.hpp"

namespace bnav {

/// A road graph plus the external vertex names it was read with.
struct Network {
    RoadGraph graph;
    std::vector<std::string> vertex_names;
    std::unordered_map<std::string, VertexId> index;

    /// Dense id for an external vertex name; ValidationError if unknown.
    VertexId vertex(const std::string& name) const;
};

/// Edge CSV: header, then from_id,to_id,length_m,incline_rad,speed_limit_mps,
/// mean_speed_mps,speed_var[,lat1,lon1,lat2,lon2]. Empty speed cells load as
/// NaN and are rejected later by scenarios that need them.
Network parse_network(std::istream& in, const std::string& origin = "<stream>");
Network load_network(const std::filesystem::path& path);
void write_network(std::ostream& out, const Network& net);
void save_network(const std::filesystem::path& path, const Network& net);

/// Network with vertex names "0".."n-1".
Network make_network(RoadGraph graph);

/// Per-edge truth and prior, keyed by edge order in the network file:
/// edge,from_id,to_id,theta_star,sigma,prior_mu,prior_var,noise_var.
void save_ground_truth(const std::filesystem::path& path, const Network& net,
                       const GroundTruth& truth, std::span<const GaussianBelief> prior);

struct TruthFile {
    GroundTruth truth;
    std::vector<GaussianBelief> prior;
};
TruthFile load_ground_truth(const std::filesystem::path& path, const Network& net);

/// Experiment description. Every key is optional; unknown keys are errors.
struct ScenarioConfig {
    // misspecified | known-prior | correlated | synthetic
    std::vector<std::string> scenarios{"known-prior"};
    // greedy | ts | bayes-ucb | eps-greedy-<p> | eps-greedy-decay |
    // batched-<base> | qpmd-<base>
    std::vector<std::string> policies{"ts"};
    ModelKind model = ModelKind::RectifiedGaussian;
    std::size_t horizon = 2000;
    // Fleet size, or batch size for batched-* policies.
    std::vector<std::size_t> agents{1};
    std::optional<std::size_t> batches;
    std::size_t delay = 1;  // feedback delay for qpmd-* policies
    std::vector<std::uint64_t> seeds{1};

    std::string network;  // edge CSV
    std::string truth;    // optional ground-truth CSV for the synthetic scenario
    std::optional<SynthSpec> synthetic;
    std::string source, target;

    double theta_factor = 0.25;
    double noise_factor = 0.1;
    VehicleParams vehicle;
    std::size_t mc_samples = 100000;

    std::string output_dir = "out";
    std::size_t jobs = 1;

    /// Range checks and cross-field rules (batch divisibility, policy names).
    void validate() const;
};

ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string dump_config(const ScenarioConfig& config);

std::string to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);

}  // namespace bnav
