#include "orthosmooth/global_smoother.hpp"

#include <string>

#include "orthosmooth/error.hpp"

namespace orthosmooth {

Eigen::VectorXd GlobalFit::weights(SmootherKind which) const {
    if (which == SmootherKind::Ols) return Eigen::VectorXd::Ones(basis.d());
    return summary.V;
}

Eigen::VectorXd apply_smoother(const OrthoBasis& basis, const Eigen::VectorXd& weights, const Eigen::VectorXd& v) {
    const Eigen::VectorXd coef = weights.cwiseProduct(basis.project(v));
    return basis.values() * coef;
}

double smoother_trace(const OrthoBasis& basis, const Eigen::VectorXd& weights) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < basis.n(); ++i) {
        acc += basis.row(i).array().square().matrix().dot(weights);
    }
    return acc / static_cast<double>(basis.n());
}

Eigen::MatrixXd smoother_matrix(const OrthoBasis& basis, const Eigen::VectorXd& weights) {
    const Eigen::MatrixXd& b = basis.values();
    return b * weights.asDiagonal() * b.transpose() / static_cast<double>(basis.n());
}

GlobalFit fit_global(const Dataset& data, int d, const PriorConfig& prior, const McmcConfig& mcmc,
                     const GlobalOptions& options) {
    prior.validate();
    mcmc.validate();
    const auto xs = data.xs();
    const auto ys = data.ys();

    GlobalFit fit;
    fit.basis = build_global(xs, d);
    fit.x = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    fit.y = Eigen::Map<const Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    fit.y_mean = fit.y.mean();
    fit.ols_dof = static_cast<double>(d);

    const Eigen::VectorXd centered = fit.y.array() - fit.y_mean;
    const Eigen::Index n = fit.basis.n();

    if (fit.y.maxCoeff() == fit.y.minCoeff()) {
        fit.summary.V = Eigen::VectorXd::Zero(d);
        fit.summary.V_mcse = Eigen::VectorXd::Zero(d);
        fit.summary.z = Eigen::VectorXd::Zero(d);
        fit.summary.beta_star = Eigen::VectorXd::Zero(d);
        fit.summary.beta_ols = Eigen::VectorXd::Zero(d);
        fit.summary.beta_hat = Eigen::VectorXd::Zero(d);
        fit.summary.degenerate = true;
        fit.fitted = Eigen::VectorXd::Constant(n, fit.y_mean);
        fit.ols_fitted = fit.fitted;
        fit.dof = 0.0;
        return fit;
    }

    fit.summary = fit_spike_slab(centered, fit.basis, prior, mcmc, options.gibbs);
    fit.fitted = fit.basis.values() * fit.summary.beta_hat;
    fit.fitted.array() += fit.y_mean;
    fit.ols_fitted = fit.basis.values() * fit.basis.project(centered);
    fit.ols_fitted.array() += fit.y_mean;
    fit.dof = fit.summary.dof;
    return fit;
}

EffectiveKernel effective_kernel(const GlobalFit& fit, Eigen::Index i, SmootherKind which) {
    const Eigen::Index n = fit.basis.n();
    if (i < 0 || i >= n) {
        throw DomainError("kernel index " + std::to_string(i) + " out of range [0, " + std::to_string(n) + ")");
    }
    const Eigen::VectorXd w = fit.weights(which);
    const Eigen::VectorXd row_coef = fit.basis.row(i).transpose().cwiseProduct(w);
    EffectiveKernel k;
    k.target_index = i;
    k.weights = fit.basis.values() * row_coef / static_cast<double>(n);
    k.self_weight = k.weights[i];
    return k;
}

Eigen::VectorXd effective_kernel_diagonal(const GlobalFit& fit, SmootherKind which) {
    const Eigen::VectorXd w = fit.weights(which);
    return fit.basis.values().array().square().matrix() * w / static_cast<double>(fit.basis.n());
}

double dof(const GlobalFit& fit, SmootherKind which) {
    if (which == SmootherKind::Ols) return fit.ols_dof;
    return fit.dof;
}

}  // namespace orthosmooth
