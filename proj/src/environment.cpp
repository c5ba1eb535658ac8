#include "bnav/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bnav {

std::string to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Misspecified: return "misspecified";
        case ScenarioKind::KnownPrior: return "known-prior";
        case ScenarioKind::Correlated: return "correlated";
    }
    return "unknown";
}

ScenarioKind parse_scenario(const std::string& name) {
    if (name == "misspecified") return ScenarioKind::Misspecified;
    if (name == "known-prior") return ScenarioKind::KnownPrior;
    if (name == "correlated") return ScenarioKind::Correlated;
    throw ValidationError("unknown scenario '" + name + "'");
}

std::vector<double> GroundTruth::expected_energy() const {
    std::vector<double> out(theta_star.size());
    std::transform(theta_star.begin(), theta_star.end(), out.begin(), [](double t) { return -t; });
    return out;
}

void GroundTruth::set_pairing(std::vector<std::pair<EdgeId, EdgeId>> pairing) {
    partner.assign(num_edges(), kNoPartner);
    for (auto [a, b] : pairing) {
        if (a >= num_edges() || b >= num_edges() || a == b)
            throw ValidationError("invalid edge pair");
        if (partner[a] != kNoPartner || partner[b] != kNoPartner)
            throw ValidationError("edge pairs must be disjoint");
        partner[a] = b;
        partner[b] = a;
    }
    pairs = std::move(pairing);
}

namespace {

void require_speed_fields(const RoadGraph& graph) {
    for (std::size_t i = 0; i < graph.num_edges(); ++i) {
        const auto& a = graph.edge(static_cast<EdgeId>(i)).attrs;
        if (!std::isfinite(a.speed_limit_mps) || !std::isfinite(a.mean_speed_mps) ||
            !std::isfinite(a.speed_var))
            throw ValidationError("edge " + std::to_string(i) +
                                  " is missing speed_limit, mean_speed or speed_var");
    }
}

}  // namespace

std::vector<GaussianBelief> speed_limit_priors(const RoadGraph& graph, const VehicleParams& vp,
                                               double theta_factor, double noise_factor) {
    vp.validate();
    std::vector<GaussianBelief> out;
    out.reserve(graph.num_edges());
    for (const Edge& e : graph.edges()) {
        if (!std::isfinite(e.attrs.speed_limit_mps))
            throw ValidationError("edge is missing its speed limit");
        const double energy =
            prior_energy(e.attrs, vp, e.attrs.speed_limit_mps, vp.efficiency_traction);
        out.push_back(make_edge_belief(energy, theta_factor, noise_factor));
    }
    return out;
}

MisspecifiedSetup build_misspecified(const RoadGraph& graph, const VehicleParams& vp,
                                     double theta_factor, double noise_factor, ModelKind model,
                                     std::uint64_t seed, std::size_t mc_samples) {
    require_speed_fields(graph);
    if (mc_samples == 0) throw ValidationError("need at least one Monte-Carlo sample");
    const auto priors = speed_limit_priors(graph, vp, theta_factor, noise_factor);

    GroundTruth truth;
    truth.law = RewardLaw::Physics;
    truth.vehicle = vp;
    truth.theta_star.resize(graph.num_edges());
    truth.sigma.resize(graph.num_edges());
    for (std::size_t i = 0; i < graph.num_edges(); ++i) {
        const auto& a = graph.edge(static_cast<EdgeId>(i)).attrs;
        truth.attrs.push_back(a);
        Rng rng = make_stream(seed, Stream::TruthMonteCarlo, i);
        std::normal_distribution<double> unit(0.0, 1.0);
        const double speed_sd = std::sqrt(a.speed_var);
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t s = 0; s < mc_samples; ++s) {
            const double energy = realized_energy(a, vp, a.mean_speed_mps + speed_sd * unit(rng));
            sum += energy;
            sum_sq += energy * energy;
        }
        const double mean = sum / static_cast<double>(mc_samples);
        truth.theta_star[i] = -mean;
        truth.sigma[i] =
            std::sqrt(std::max(0.0, sum_sq / static_cast<double>(mc_samples) - mean * mean));
    }
    return {std::move(truth), BeliefState::from_gaussian(model, priors)};
}

GroundTruth build_known_prior(std::span<const GaussianBelief> prior, Rng& rng) {
    GroundTruth truth;
    truth.law = RewardLaw::Gaussian;
    std::normal_distribution<double> unit(0.0, 1.0);
    for (const auto& b : prior) {
        if (!(b.var >= 0.0) || !(b.noise_var >= 0.0))
            throw ValidationError("prior variances must be non-negative");
        truth.theta_star.push_back(b.mu + std::sqrt(b.var) * unit(rng));
        truth.sigma.push_back(std::sqrt(b.noise_var));
    }
    return truth;
}

std::vector<std::pair<EdgeId, EdgeId>> pair_edges(std::size_t num_edges, Rng& rng) {
    std::vector<EdgeId> ids(num_edges);
    std::iota(ids.begin(), ids.end(), EdgeId{0});
    std::shuffle(ids.begin(), ids.end(), rng);
    std::vector<std::pair<EdgeId, EdgeId>> out;
    for (std::size_t i = 0; i + 1 < ids.size(); i += 2) {
        out.emplace_back(std::min(ids[i], ids[i + 1]), std::max(ids[i], ids[i + 1]));
    }
    if (num_edges % 2 == 1)
        warn("odd edge count: edge " + std::to_string(ids.back()) + " left unpaired");
    return out;
}

std::vector<double> sample_rewards(const GroundTruth& truth, const Path& path, Rng& rng) {
    std::vector<double> rewards;
    rewards.reserve(path.edges.size());
    std::normal_distribution<double> unit(0.0, 1.0);

    if (truth.law == RewardLaw::Physics) {
        for (EdgeId e : path.edges) {
            const auto& a = truth.attrs.at(e);
            const double v = a.mean_speed_mps + std::sqrt(a.speed_var) * unit(rng);
            rewards.push_back(-realized_energy(a, truth.vehicle, v));
        }
        return rewards;
    }

    // Latest standard-normal draw per edge, so a partner later on the path can
    // reuse it.
    std::vector<std::pair<EdgeId, double>> drawn;
    for (EdgeId e : path.edges) {
        double x = 0.0;
        bool shared = false;
        if (!truth.partner.empty() && truth.partner.at(e) != kNoPartner) {
            const EdgeId p = truth.partner[e];
            for (auto it = drawn.rbegin(); it != drawn.rend(); ++it) {
                if (it->first == p) {
                    x = it->second;
                    shared = true;
                    break;
                }
            }
        }
        if (!shared) x = unit(rng);
        drawn.emplace_back(e, x);
        rewards.push_back(truth.theta_star.at(e) + truth.sigma.at(e) * x);
    }
    return rewards;
}

}  // namespace bnav
