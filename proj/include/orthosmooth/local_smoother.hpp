#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "orthosmooth/dataset.hpp"
#include "orthosmooth/error.hpp"
#include "orthosmooth/spike_slab.hpp"

namespace orthosmooth {

struct LocalConfig {
    double h = 1.0;
    int d = 3;
    PriorConfig prior;
    McmcConfig mcmc = McmcConfig::local_defaults();
    std::optional<int> min_neighbors;  // defaults to d + 3

    int resolved_min_neighbors() const { return min_neighbors.value_or(d + 3); }
    void validate() const;
};

struct LocalFit {
    std::size_t i = 0;
    std::vector<std::size_t> neighborhood;  // ascending indices, contains i
    std::size_t position = 0;               // where i sits inside neighborhood
    std::size_t n_i = 0;
    double sigma_i = 0.0;
    double y_bar_i = 0.0;
    Eigen::VectorXd V;  // local shrinkage weights V_{i,k}
    PosteriorSummary summary;
    double f_hat = 0.0;
    double dof_i = 0.0;
    bool widened = false;     // the h-window was too small
    bool degenerate = false;  // sigma_i == 0, constant local fit
};

struct DofCurve {
    std::vector<double> x;
    std::vector<double> dof;
};

struct PointFailure {
    std::size_t i = 0;
    ErrorKind kind = ErrorKind::Numerical;
    std::string message;
};

struct CurveFit {
    std::vector<double> fitted;
    DofCurve dof_curve;
    std::vector<LocalFit> fits;  // failed points keep i and NaN f_hat / dof_i
    std::vector<PointFailure> failures;
};

/// {j : |x_j - x_i| < h} via binary search on the sorted x values.
std::vector<std::size_t> neighborhood(const Dataset& data, std::size_t i, double h);

/// The h-window, or the min_neighbors points nearest to x_i when the window
/// is smaller (ties go to the smaller index).
std::vector<std::size_t> widened_neighborhood(const Dataset& data, std::size_t i, double h, std::size_t min_neighbors);

/// Rice difference estimator sum (y_(j+1) - y_(j))^2 / (2 (n_i - 1)) over the
/// neighborhood ordered by x, and its square root.
double rice_variance(const Dataset& data, std::span<const std::size_t> neighborhood);
double rice_sigma(const Dataset& data, std::span<const std::size_t> neighborhood);

/// Per-point seed, independent of evaluation order.
std::uint64_t point_seed(std::uint64_t seed, std::size_t i);

LocalFit fit_point(const Dataset& data, std::size_t i, const LocalConfig& cfg, const GibbsOptions& options = {});

/// Fits every point with up to `jobs` worker threads. Per-point errors are
/// collected; throws when more than 10% of points fail.
CurveFit fit_curve(const Dataset& data, const LocalConfig& cfg, unsigned jobs = 1, const GibbsOptions& options = {});

}  // namespace orthosmooth
