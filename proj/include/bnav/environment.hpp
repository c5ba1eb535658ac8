#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnav/energy.hpp"
#include "bnav/graph.hpp"

namespace bnav {

enum class ScenarioKind { Misspecified, KnownPrior, Correlated };

std::string to_string(ScenarioKind kind);
ScenarioKind parse_scenario(const std::string& name);

/// How rewards are drawn for a traversed edge.
enum class RewardLaw {
    Gaussian,  // r ~ N(theta*, sigma^2), optionally with perfectly correlated pairs
    Physics,   // speed ~ N(mean_speed, speed_var) pushed through the energy model
};

inline constexpr EdgeId kNoPartner = static_cast<EdgeId>(-1);

/// The environment's hidden truth for one problem instance. Immutable once
/// built.
struct GroundTruth {
    RewardLaw law = RewardLaw::Gaussian;
    std::vector<double> theta_star;  // true mean reward (negated mean energy)
    std::vector<double> sigma;       // reward noise std
    std::vector<std::pair<EdgeId, EdgeId>> pairs;
    std::vector<EdgeId> partner;  // kNoPartner when unpaired; empty when no pairing

    // Physics law only.
    std::vector<EdgeAttributes> attrs;
    VehicleParams vehicle;

    std::size_t num_edges() const { return theta_star.size(); }
    /// Expected energy per edge, i.e. -theta*.
    std::vector<double> expected_energy() const;
    void set_pairing(std::vector<std::pair<EdgeId, EdgeId>> pairing);
};

/// Gaussian priors from the energy model evaluated at each edge's speed
/// limit (eta+ throughout).
std::vector<GaussianBelief> speed_limit_priors(const RoadGraph& graph, const VehicleParams& vp,
                                               double theta_factor, double noise_factor);

struct MisspecifiedSetup {
    GroundTruth truth;
    BeliefState prior;
};

/// Truth follows observed traffic speeds; the agent's prior uses the speed
/// limit. Expected energies for regret come from `mc_samples` draws per edge.
MisspecifiedSetup build_misspecified(const RoadGraph& graph, const VehicleParams& vp,
                                     double theta_factor, double noise_factor, ModelKind model,
                                     std::uint64_t seed, std::size_t mc_samples = 100000);

/// theta*_e drawn from each edge's Gaussian prior; rewards N(theta*_e, noise_var_e).
GroundTruth build_known_prior(std::span<const GaussianBelief> prior, Rng& rng);

/// Uniformly random disjoint pairing of edge ids. Odd counts leave one edge
/// unpaired.
std::vector<std::pair<EdgeId, EdgeId>> pair_edges(std::size_t num_edges, Rng& rng);

/// One reward per edge occurrence of `path`. Paired edges that are both on
/// the path share their standard-normal draw.
std::vector<double> sample_rewards(const GroundTruth& truth, const Path& path, Rng& rng);

}  // namespace bnav
