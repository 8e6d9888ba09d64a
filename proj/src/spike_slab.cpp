#include "orthosmooth/spike_slab.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "orthosmooth/error.hpp"

namespace orthosmooth {

void PriorConfig::validate() const {
    if (!(a1 > 1.0) || !std::isfinite(a1)) throw ConfigError("prior a1 must be > 1");
    if (!(a2 > 0.0) || !std::isfinite(a2)) throw ConfigError("prior a2 must be > 0");
    if (!(v0 > 0.0 && v0 < 1.0)) throw ConfigError("prior v0 must lie in (0, 1)");
}

void McmcConfig::validate() const {
    if (burn_in < 0) throw ConfigError("burn-in must be >= 0");
    if (n_iter <= burn_in) throw ConfigError("iterations must exceed burn-in");
    if (thin < 1) throw ConfigError("thin must be >= 1");
}

Rescaled rescale_response(const Eigen::VectorXd& y, const OrthoBasis& basis) {
    const Eigen::Index n = basis.n();
    const Eigen::Index d = basis.d();
    if (y.size() != n) throw SizeError("response length does not match basis rows");
    if (n <= d) {
        throw SizeError("rescaling needs n > d: n = " + std::to_string(n) + ", d = " + std::to_string(d));
    }
    const Eigen::VectorXd coef = basis.project(y);
    const double rss = (y - basis.values() * coef).squaredNorm();
    const double yss = y.squaredNorm();
    if (!(rss > 1e-24 * yss)) {
        throw DegenerateFitError("residual variance is zero: the data are fit exactly by the degree-" +
                                 std::to_string(d) + " basis; use a smaller degree");
    }
    Rescaled out;
    out.sigma_hat = std::sqrt(rss / static_cast<double>(n - d));
    out.y_star = y * (std::sqrt(static_cast<double>(n)) / out.sigma_hat);
    return out;
}

namespace conditionals {

double draw_beta(double z, double gamma, Rng& rng) {
    const double nu = gamma / (1.0 + gamma);
    std::normal_distribution<double> normal(0.0, 1.0);
    return nu * z + std::sqrt(nu) * normal(rng);
}

double draw_inv_tau2(double beta, double indicator, const PriorConfig& prior, Rng& rng) {
    const double rate = prior.a2 + beta * beta / (2.0 * indicator);
    std::gamma_distribution<double> gamma(prior.a1 + 0.5, 1.0 / rate);
    return gamma(rng);
}

double slab_probability(double beta, double tau2, double w, double v0) {
    const double log_odds = std::log(w) - std::log1p(-w) + 0.5 * std::log(v0) +
                            beta * beta / (2.0 * tau2) * (1.0 / v0 - 1.0);
    if (log_odds > 0.0) return 1.0 / (1.0 + std::exp(-log_odds));
    const double e = std::exp(log_odds);
    return e / (1.0 + e);
}

double draw_indicator(double beta, double tau2, double w, double v0, Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    return unif(rng) < slab_probability(beta, tau2, w, v0) ? 1.0 : v0;
}

double draw_w(int n_slab, int n_spike, Rng& rng) {
    std::gamma_distribution<double> ga(1.0 + n_slab, 1.0);
    std::gamma_distribution<double> gb(1.0 + n_spike, 1.0);
    const double a = ga(rng);
    const double b = gb(rng);
    return a / (a + b);
}

}  // namespace conditionals

GibbsSampler::GibbsSampler(const Eigen::VectorXd& z, const PriorConfig& prior, std::uint64_t seed,
                           std::optional<Eigen::VectorXd> fixed_gamma)
    : z_(z), prior_(prior), rng_(seed), fixed_gamma_(std::move(fixed_gamma)) {
    const Eigen::Index d = z.size();
    state_.beta = z;
    state_.tau2 = Eigen::VectorXd::Ones(d);
    state_.indicator = Eigen::VectorXd::Ones(d);
    state_.w = 0.5;
    if (fixed_gamma_) {
        if (fixed_gamma_->size() != d) throw SizeError("fixed gamma length does not match d");
        state_.tau2 = *fixed_gamma_;
    }
}

Eigen::VectorXd GibbsSampler::nu() const {
    const Eigen::VectorXd g = state_.gamma();
    return g.array() / (1.0 + g.array());
}

void GibbsSampler::sweep() {
    const Eigen::Index d = z_.size();
    for (Eigen::Index k = 0; k < d; ++k) {
        state_.beta[k] = conditionals::draw_beta(z_[k], state_.indicator[k] * state_.tau2[k], rng_);
    }
    if (fixed_gamma_) return;

    for (Eigen::Index k = 0; k < d; ++k) {
        state_.tau2[k] = 1.0 / conditionals::draw_inv_tau2(state_.beta[k], state_.indicator[k], prior_, rng_);
    }
    int n_slab = 0;
    for (Eigen::Index k = 0; k < d; ++k) {
        state_.indicator[k] = conditionals::draw_indicator(state_.beta[k], state_.tau2[k], state_.w, prior_.v0, rng_);
        if (state_.indicator[k] == 1.0) ++n_slab;
    }
    state_.w = conditionals::draw_w(n_slab, static_cast<int>(d) - n_slab, rng_);
}

namespace {

void check_orthogonal(const OrthoBasis& basis) {
    const auto defect = orthogonality_defect(basis.values());
    const double tol = 1e-8 * static_cast<double>(basis.n());
    if (defect.max_off_diagonal > tol || defect.max_diagonal_error > tol) {
        throw PreconditionError("basis is not orthogonal: max |B^T B - nI| = " +
                                std::to_string(std::max(defect.max_off_diagonal, defect.max_diagonal_error)));
    }
}

// Batch means with floor(sqrt(m)) batches.
double batch_means_se(const std::vector<double>& trace) {
    const std::size_t m = trace.size();
    const std::size_t batches = static_cast<std::size_t>(std::sqrt(static_cast<double>(m)));
    if (batches < 2) return 0.0;
    const std::size_t size = m / batches;
    std::vector<double> means(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < size; ++j) s += trace[b * size + j];
        means[b] = s / static_cast<double>(size);
    }
    double mu = 0.0;
    for (double v : means) mu += v;
    mu /= static_cast<double>(batches);
    double ss = 0.0;
    for (double v : means) ss += (v - mu) * (v - mu);
    return std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches));
}

}  // namespace

PosteriorSummary gibbs_fit(const Eigen::VectorXd& y_star, const OrthoBasis& basis, const PriorConfig& prior,
                           const McmcConfig& mcmc, const GibbsOptions& options) {
    prior.validate();
    mcmc.validate();
    if (y_star.size() != basis.n()) throw SizeError("response length does not match basis rows");
    if (options.check_orthogonality) check_orthogonal(basis);

    const Eigen::Index d = basis.d();
    const Eigen::VectorXd z = basis.project(y_star);
    GibbsSampler sampler(z, prior, mcmc.seed, options.fixed_gamma);

    std::vector<std::vector<double>> traces(static_cast<std::size_t>(d));
    for (auto& t : traces) t.reserve(static_cast<std::size_t>(mcmc.kept()));
    Eigen::VectorXd nu_sum = Eigen::VectorXd::Zero(d);
    double w_sum = 0.0;
    int kept = 0;

    for (int it = 0; it < mcmc.n_iter; ++it) {
        sampler.sweep();
        const GibbsState& s = sampler.state();
        if (!s.beta.allFinite() || !s.tau2.allFinite() || !std::isfinite(s.w)) {
            throw NumericalError("Gibbs chain produced a non-finite state at sweep " + std::to_string(it));
        }
        if (it < mcmc.burn_in || (it - mcmc.burn_in) % mcmc.thin != 0) continue;
        const Eigen::VectorXd nu = sampler.nu();
        nu_sum += nu;
        for (Eigen::Index k = 0; k < d; ++k) traces[static_cast<std::size_t>(k)].push_back(nu[k]);
        w_sum += s.w;
        ++kept;
    }

    PosteriorSummary out;
    out.kept_sweeps = kept;
    out.z = z;
    out.V = nu_sum / static_cast<double>(kept);
    out.V_mcse.resize(d);
    for (Eigen::Index k = 0; k < d; ++k) out.V_mcse[k] = batch_means_se(traces[static_cast<std::size_t>(k)]);
    out.beta_star = out.V.cwiseProduct(z);
    out.beta_hat = Eigen::VectorXd::Zero(d);
    out.beta_ols = Eigen::VectorXd::Zero(d);
    out.dof = out.V.sum();
    out.w_mean = w_sum / static_cast<double>(kept);
    return out;
}

PosteriorSummary back_transform(PosteriorSummary summary, double sigma_hat, Eigen::Index n) {
    const double factor = sigma_hat / std::sqrt(static_cast<double>(n));
    summary.sigma_hat = sigma_hat;
    summary.beta_hat = factor * summary.beta_star;
    summary.beta_ols = factor * summary.z;
    return summary;
}

PosteriorSummary fit_spike_slab(const Eigen::VectorXd& y_centered, const OrthoBasis& basis, const PriorConfig& prior,
                                const McmcConfig& mcmc, const GibbsOptions& options) {
    const Rescaled r = rescale_response(y_centered, basis);
    return back_transform(gibbs_fit(r.y_star, basis, prior, mcmc, options), r.sigma_hat, basis.n());
}

}  // namespace orthosmooth
