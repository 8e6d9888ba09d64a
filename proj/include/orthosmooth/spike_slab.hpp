#pragma once

#include <cstdint>
#include <optional>
#include <random>

#include <Eigen/Dense>

#include "orthosmooth/ortho_basis.hpp"

namespace orthosmooth {

using Rng = std::mt19937_64;

/// Hyperparameters of the continuous bimodal prior on the hypervariances:
/// gamma_k = I_k * tau_k^2 with I_k in {v0, 1}, P(I_k = 1 | w) = w,
/// tau_k^{-2} ~ Gamma(shape a1, rate a2) and w ~ Uniform(0, 1).
struct PriorConfig {
    double a1 = 5.0;
    double a2 = 50.0;
    double v0 = 0.005;

    void validate() const;
};

struct McmcConfig {
    int n_iter = 5000;
    int burn_in = 1000;
    std::uint64_t seed = 20070101;
    int thin = 1;

    void validate() const;
    int kept() const noexcept { return (n_iter - burn_in + thin - 1) / thin; }

    static McmcConfig local_defaults() { return {2000, 500, 20070101, 1}; }
};

struct GibbsState {
    Eigen::VectorXd beta;
    Eigen::VectorXd tau2;
    Eigen::VectorXd indicator;  // entries are v0 or 1
    double w = 0.5;

    Eigen::VectorXd gamma() const { return indicator.cwiseProduct(tau2); }
};

struct PosteriorSummary {
    Eigen::VectorXd V;          // E(nu_k | Y*), nu_k = gamma_k / (1 + gamma_k)
    Eigen::VectorXd V_mcse;     // batch-means Monte Carlo standard error of V
    Eigen::VectorXd z;          // B^T y* / n
    Eigen::VectorXd beta_star;  // E(beta | Y*) = V .* z
    Eigen::VectorXd beta_ols;   // B^T y / n on the original scale
    Eigen::VectorXd beta_hat;   // sigma_hat n^{-1/2} beta_star
    double sigma_hat = 0.0;
    double dof = 0.0;           // sum_k V_k
    double w_mean = 0.0;
    int kept_sweeps = 0;
    bool degenerate = false;    // constant response: no fit was run
};

struct Rescaled {
    Eigen::VectorXd y_star;
    double sigma_hat = 0.0;
};

/// y* = sigma_hat^{-1} sqrt(n) y with sigma_hat^2 the full-model residual
/// variance ||y - B beta_ols||^2 / (n - d). y must already be centered.
/// Throws SizeError for n <= d, DegenerateFitError for a zero residual.
Rescaled rescale_response(const Eigen::VectorXd& y, const OrthoBasis& basis);

/// Full conditionals of the rescaled hierarchy under B^T B = n I. They are
/// exposed individually so they can be checked against their analytic laws.
namespace conditionals {

/// beta_k | gamma_k, Y* ~ N(nu z_k, nu), nu = gamma_k / (1 + gamma_k).
double draw_beta(double z, double gamma, Rng& rng);

/// tau_k^{-2} | beta_k, I_k ~ Gamma(a1 + 1/2, rate a2 + beta_k^2 / (2 I_k)).
double draw_inv_tau2(double beta, double indicator, const PriorConfig& prior, Rng& rng);

/// P(I_k = 1 | beta_k, tau_k^2, w): ratio of N(0, tau^2) to N(0, v0 tau^2)
/// densities at beta_k times w / (1 - w), mapped to a probability.
double slab_probability(double beta, double tau2, double w, double v0);

double draw_indicator(double beta, double tau2, double w, double v0, Rng& rng);

/// w | I ~ Beta(1 + #slab, 1 + #spike).
double draw_w(int n_slab, int n_spike, Rng& rng);

}  // namespace conditionals

struct GibbsOptions {
    // Test hook: hold gamma fixed and skip the tau / indicator / w updates.
    std::optional<Eigen::VectorXd> fixed_gamma;
    bool check_orthogonality = true;
};

/// One Gibbs chain. Sweeps update beta -> tau^2 -> I -> w in that order,
/// starting from beta = z, tau^2 = 1, I = 1, w = 1/2.
class GibbsSampler {
public:
    GibbsSampler(const Eigen::VectorXd& z, const PriorConfig& prior, std::uint64_t seed,
                 std::optional<Eigen::VectorXd> fixed_gamma = std::nullopt);

    void sweep();
    const GibbsState& state() const noexcept { return state_; }
    Eigen::VectorXd nu() const;

private:
    Eigen::VectorXd z_;
    PriorConfig prior_;
    Rng rng_;
    GibbsState state_;
    std::optional<Eigen::VectorXd> fixed_gamma_;
};

/// Runs the chain and returns Rao-Blackwellized summaries: V averages nu over
/// kept sweeps and beta_star = V .* z. beta_hat and sigma_hat are left for
/// back_transform. Deterministic given mcmc.seed.
PosteriorSummary gibbs_fit(const Eigen::VectorXd& y_star, const OrthoBasis& basis, const PriorConfig& prior,
                           const McmcConfig& mcmc, const GibbsOptions& options = {});

/// beta_hat = sigma_hat n^{-1/2} beta_star; also fills beta_ols = sigma_hat n^{-1/2} z.
PosteriorSummary back_transform(PosteriorSummary summary, double sigma_hat, Eigen::Index n);

/// rescale_response + gibbs_fit + back_transform on a centered response.
PosteriorSummary fit_spike_slab(const Eigen::VectorXd& y_centered, const OrthoBasis& basis, const PriorConfig& prior,
                                const McmcConfig& mcmc, const GibbsOptions& options = {});

}  // namespace orthosmooth
