#pragma once

#include <span>
#include <vector>

#include "bnav/common.hpp"
#include "bnav/graph.hpp"

namespace bnav {

/// Medium-duty electric truck used throughout the experiments.
struct VehicleParams {
    double mass_kg = 14750.0;
    double front_area_m2 = 8.0;
    double drag_coeff = 0.7;
    double rolling_coeff = 0.0064;
    double efficiency_traction = 0.88;  // eta+
    double efficiency_regen = 1.2;      // eta-
    double gravity = 9.81;
    double air_density = 1.2;

    /// Throws ValidationError unless every field is strictly positive and
    /// efficiency_regen >= efficiency_traction.
    void validate() const;
};

// Beliefs never carry a variance below this (Wh^2).
inline constexpr double kVarianceFloor = 1e-6;
// Observed energies are clamped to at least this (Wh) before a log transform.
inline constexpr double kPositiveEnergyFloor = 1e-3;

/// Mechanical work over the edge in joules, before dividing by efficiency:
/// gravity + rolling resistance + aerodynamic drag at constant speed.
double traction_work_j(const EdgeAttributes& attrs, const VehicleParams& vp, double speed_mps);

/// Energy in Wh for a caller-chosen powertrain efficiency.
double prior_energy(const EdgeAttributes& attrs, const VehicleParams& vp, double speed_mps,
                    double efficiency);

/// Energy in Wh using eta+ for traction and eta- when the work is negative.
double realized_energy(const EdgeAttributes& attrs, const VehicleParams& vp, double speed_mps);

double normal_pdf(double z);
double normal_cdf(double z);
/// Inverse standard normal CDF for p in (0, 1).
double normal_quantile(double p);

struct GaussianBelief {
    double mu = 0.0;         // posterior mean of the reward (negated energy)
    double var = 1.0;        // posterior variance of the mean
    double noise_var = 1.0;  // known observation variance
};

/// Gaussian over g = log(-theta).
struct LogGaussianBelief {
    double log_mu = 0.0;
    double log_var = 1.0;
    double noise_shape = 1.0;  // log(1 + sigma^2 / psi^2)
    double psi = -1.0;
};

enum class ModelKind { RectifiedGaussian, LogGaussian };

GaussianBelief init_prior(double energy_wh, double theta_factor);

/// Prior and noise for one edge: mu = -E, var = (theta_factor E)^2,
/// noise_var = (noise_factor E)^2, both variances floored.
GaussianBelief make_edge_belief(double energy_wh, double theta_factor, double noise_factor);

GaussianBelief gaussian_update(const GaussianBelief& b, double reward);

/// E[max(0, X)] for X ~ N(-theta, sigma^2).
double rectified_mean(double theta, double sigma);

struct LogNormalParams {
    double location = 0.0;
    double scale2 = 0.0;
};

/// Log-Gaussian observation law whose mean is -theta and variance is
/// noise_var * theta^2 / psi^2.
LogNormalParams lognormal_likelihood_params(double theta, double noise_var, double psi);

/// Log-Gaussian prior over -theta with mean -mu0 and variance var0. The
/// returned belief has psi = mu0 and noise_shape left at its default.
LogGaussianBelief lognormal_prior(double mu0, double var0);

/// Log-Gaussian prior and noise built from an equivalent Gaussian belief.
LogGaussianBelief to_lognormal(const GaussianBelief& gaussian);

LogGaussianBelief lognormal_update(const LogGaussianBelief& b, double observed_energy);

/// Edge weight for a sampled or quantile reward mean. Rectified kind takes the
/// rectified mean with the edge noise; Log-Gaussian kind negates.
double belief_to_weight(double theta, ModelKind kind, double noise_std);

/// Per-edge beliefs for one run under a single model kind.
class BeliefState {
  public:
    BeliefState() = default;
    static BeliefState rectified(std::vector<GaussianBelief> beliefs);
    static BeliefState log_gaussian(std::vector<LogGaussianBelief> beliefs);
    /// Builds the requested model from Gaussian prior parameters. For the
    /// Log-Gaussian kind prior means above -kPositiveEnergyFloor are clamped.
    static BeliefState from_gaussian(ModelKind kind, std::span<const GaussianBelief> priors);

    ModelKind kind() const { return kind_; }
    std::size_t size() const;

    const GaussianBelief& gaussian(EdgeId e) const { return gaussian_.at(e); }
    const LogGaussianBelief& log_gaussian(EdgeId e) const { return log_.at(e); }

    /// Posterior mean of theta_e.
    double mean_reward(EdgeId e) const;
    /// Observation noise std in reward units, used by the rectified weight
    /// transform. Zero for the Log-Gaussian kind.
    double noise_std(EdgeId e) const;

    /// Conjugate update with one reward observation (negated energy).
    void observe(EdgeId e, double reward);
    void observe(std::span<const EdgeId> edges, std::span<const double> rewards);

  private:
    ModelKind kind_ = ModelKind::RectifiedGaussian;
    std::vector<GaussianBelief> gaussian_;
    std::vector<LogGaussianBelief> log_;
};

}  // namespace bnav
