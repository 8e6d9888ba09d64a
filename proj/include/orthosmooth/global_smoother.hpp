#pragma once

#include <Eigen/Dense>

#include "orthosmooth/dataset.hpp"
#include "orthosmooth/ortho_basis.hpp"
#include "orthosmooth/spike_slab.hpp"

namespace orthosmooth {

enum class SmootherKind { Ols, SpikeSlab };

struct GlobalFit {
    OrthoBasis basis;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
    double y_mean = 0.0;
    PosteriorSummary summary;
    Eigen::VectorXd fitted;      // y_mean + S* (y - y_mean)
    Eigen::VectorXd ols_fitted;  // y_mean + S (y - y_mean)
    double dof = 0.0;
    double ols_dof = 0.0;

    /// Shrinkage weights for the chosen smoother (all ones for OLS).
    Eigen::VectorXd weights(SmootherKind which) const;
};

struct EffectiveKernel {
    Eigen::Index target_index = 0;
    Eigen::VectorXd weights;  // row i of the smoother matrix
    double self_weight = 0.0;
};

/// Applies n^{-1} B diag(weights) B^T to v without forming the n x n matrix.
Eigen::VectorXd apply_smoother(const OrthoBasis& basis, const Eigen::VectorXd& weights, const Eigen::VectorXd& v);

/// tr(n^{-1} B diag(weights) B^T), accumulated row by row.
double smoother_trace(const OrthoBasis& basis, const Eigen::VectorXd& weights);

/// Explicit n x n smoother matrix; only for inspection and tests.
Eigen::MatrixXd smoother_matrix(const OrthoBasis& basis, const Eigen::VectorXd& weights);

struct GlobalOptions {
    GibbsOptions gibbs;
};

/// Centers y, builds the degree-d basis, rescales, samples, and forms the
/// spike-and-slab and OLS predictions. A constant response short-circuits to
/// fitted = y_mean with dof 0.
GlobalFit fit_global(const Dataset& data, int d, const PriorConfig& prior, const McmcConfig& mcmc,
                     const GlobalOptions& options = {});

/// Row i of S (OLS) or S* (spike and slab).
EffectiveKernel effective_kernel(const GlobalFit& fit, Eigen::Index i, SmootherKind which);

/// Diagonal s_ii for every i.
Eigen::VectorXd effective_kernel_diagonal(const GlobalFit& fit, SmootherKind which);

/// Effective degrees of freedom: d for OLS, sum_k V_k for spike and slab.
double dof(const GlobalFit& fit, SmootherKind which);

}  // namespace orthosmooth
