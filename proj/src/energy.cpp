#include "bnav/energy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace bnav {

void VehicleParams::validate() const {
    const std::array<double, 8> fields{mass_kg,           front_area_m2,    drag_coeff,
                                       rolling_coeff,     efficiency_traction,
                                       efficiency_regen,  gravity,          air_density};
    for (double f : fields) {
        if (!(f > 0.0) || !std::isfinite(f))
            throw ValidationError("vehicle parameters must be finite and strictly positive");
    }
    if (efficiency_regen < efficiency_traction)
        throw ValidationError("regeneration efficiency must be >= traction efficiency");
}

double traction_work_j(const EdgeAttributes& a, const VehicleParams& vp, double speed_mps) {
    const double l = a.length_m;
    const double mg = vp.mass_kg * vp.gravity;
    return mg * l * std::sin(a.incline_rad) + mg * vp.rolling_coeff * l * std::cos(a.incline_rad) +
           0.5 * vp.drag_coeff * vp.front_area_m2 * vp.air_density * l * speed_mps * speed_mps;
}

double prior_energy(const EdgeAttributes& attrs, const VehicleParams& vp, double speed_mps,
                    double efficiency) {
    if (!(speed_mps >= 0.0)) throw ValidationError("speed must be non-negative");
    if (!(attrs.length_m >= 0.0)) throw ValidationError("edge length must be non-negative");
    return traction_work_j(attrs, vp, speed_mps) / (3600.0 * efficiency);
}

double realized_energy(const EdgeAttributes& attrs, const VehicleParams& vp, double speed_mps) {
    const double work = traction_work_j(attrs, vp, speed_mps);
    const double eta = work >= 0.0 ? vp.efficiency_traction : vp.efficiency_regen;
    return work / (3600.0 * eta);
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ValidationError("quantile probability must lie in (0, 1)");

    // Acklam's rational approximation, then one Halley step against erfc.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

GaussianBelief init_prior(double energy_wh, double theta_factor) {
    if (!(theta_factor > 0.0)) throw ValidationError("prior width factor must be positive");
    const double mu = -energy_wh;
    const double var = std::max(std::pow(theta_factor * mu, 2), kVarianceFloor);
    return {mu, var, 1.0};
}

GaussianBelief make_edge_belief(double energy_wh, double theta_factor, double noise_factor) {
    if (!(noise_factor > 0.0)) throw ValidationError("noise width factor must be positive");
    auto b = init_prior(energy_wh, theta_factor);
    b.noise_var = std::max(std::pow(noise_factor * energy_wh, 2), kVarianceFloor);
    return b;
}

GaussianBelief gaussian_update(const GaussianBelief& b, double reward) {
    if (!std::isfinite(reward)) throw ValidationError("reward observation must be finite");
    const double var = 1.0 / (1.0 / b.var + 1.0 / b.noise_var);
    const double mu = var * (b.mu / b.var + reward / b.noise_var);
    return {mu, var, b.noise_var};
}

double rectified_mean(double theta, double sigma) {
    if (!(sigma >= 0.0)) throw ValidationError("noise std must be non-negative");
    const double m = -theta;
    if (sigma == 0.0) return std::max(0.0, m);
    const double z = m / sigma;
    return std::max(0.0, m * normal_cdf(z) + sigma * normal_pdf(z));
}

LogNormalParams lognormal_likelihood_params(double theta, double noise_var, double psi) {
    if (!(theta < 0.0))
        throw ValidationError("Log-Gaussian model requires a negative reward mean");
    if (psi == 0.0) throw ValidationError("reference scale psi must be non-zero");
    if (!(noise_var >= 0.0)) throw ValidationError("noise variance must be non-negative");
    const double scale2 = std::log1p(noise_var / (psi * psi));
    return {std::log(-theta) - 0.5 * scale2, scale2};
}

LogGaussianBelief lognormal_prior(double mu0, double var0) {
    if (!(mu0 < 0.0)) throw ValidationError("Log-Gaussian prior mean must be negative");
    if (!(var0 > 0.0)) throw ValidationError("Log-Gaussian prior variance must be positive");
    const double log_var = std::log1p(var0 / (mu0 * mu0));
    LogGaussianBelief b;
    b.log_var = log_var;
    b.log_mu = std::log(-mu0) - 0.5 * log_var;
    b.psi = mu0;
    return b;
}

LogGaussianBelief to_lognormal(const GaussianBelief& g) {
    auto b = lognormal_prior(g.mu, g.var);
    b.noise_shape = lognormal_likelihood_params(g.mu, g.noise_var, b.psi).scale2;
    return b;
}

LogGaussianBelief lognormal_update(const LogGaussianBelief& b, double observed_energy) {
    if (!std::isfinite(observed_energy))
        throw ValidationError("energy observation must be finite");
    const double x = std::log(std::max(observed_energy, kPositiveEnergyFloor));
    // x ~ N(g - s/2, s), so x + s/2 observes g directly with variance s.
    const double y = x + 0.5 * b.noise_shape;
    LogGaussianBelief out = b;
    out.log_var = 1.0 / (1.0 / b.log_var + 1.0 / b.noise_shape);
    out.log_mu = out.log_var * (b.log_mu / b.log_var + y / b.noise_shape);
    return out;
}

double belief_to_weight(double theta, ModelKind kind, double noise_std) {
    if (kind == ModelKind::RectifiedGaussian) return rectified_mean(theta, noise_std);
    if (!(theta < 0.0))
        throw ValidationError("Log-Gaussian weights require a negative reward sample");
    return -theta;
}

BeliefState BeliefState::rectified(std::vector<GaussianBelief> beliefs) {
    for (const auto& b : beliefs) {
        if (!(b.var > 0.0) || !(b.noise_var > 0.0))
            throw ValidationError("Gaussian belief variances must be positive");
    }
    BeliefState s;
    s.kind_ = ModelKind::RectifiedGaussian;
    s.gaussian_ = std::move(beliefs);
    return s;
}

BeliefState BeliefState::log_gaussian(std::vector<LogGaussianBelief> beliefs) {
    for (const auto& b : beliefs) {
        if (!(b.log_var > 0.0) || !(b.noise_shape > 0.0) || !(b.psi < 0.0))
            throw ValidationError("invalid Log-Gaussian belief");
    }
    BeliefState s;
    s.kind_ = ModelKind::LogGaussian;
    s.log_ = std::move(beliefs);
    return s;
}

BeliefState BeliefState::from_gaussian(ModelKind kind, std::span<const GaussianBelief> priors) {
    if (kind == ModelKind::RectifiedGaussian)
        return rectified(std::vector<GaussianBelief>(priors.begin(), priors.end()));
    std::vector<LogGaussianBelief> out;
    out.reserve(priors.size());
    for (GaussianBelief g : priors) {
        // Log-Gaussian support is positive energy only.
        g.mu = std::min(g.mu, -kPositiveEnergyFloor);
        out.push_back(to_lognormal(g));
    }
    return log_gaussian(std::move(out));
}

std::size_t BeliefState::size() const {
    return kind_ == ModelKind::RectifiedGaussian ? gaussian_.size() : log_.size();
}

double BeliefState::mean_reward(EdgeId e) const {
    if (kind_ == ModelKind::RectifiedGaussian) return gaussian_.at(e).mu;
    const auto& b = log_.at(e);
    return -std::exp(b.log_mu + 0.5 * b.log_var);
}

double BeliefState::noise_std(EdgeId e) const {
    if (kind_ == ModelKind::RectifiedGaussian) return std::sqrt(gaussian_.at(e).noise_var);
    return 0.0;
}

void BeliefState::observe(EdgeId e, double reward) {
    if (kind_ == ModelKind::RectifiedGaussian) {
        gaussian_.at(e) = gaussian_update(gaussian_[e], reward);
    } else {
        log_.at(e) = lognormal_update(log_[e], -reward);
    }
}

void BeliefState::observe(std::span<const EdgeId> edges, std::span<const double> rewards) {
    if (edges.size() != rewards.size())
        throw ValidationError("reward vector does not match the played path");
    for (std::size_t i = 0; i < edges.size(); ++i) observe(edges[i], rewards[i]);
}

}  // namespace bnav
