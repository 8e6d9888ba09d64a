#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "orthosmooth/spike_slab.hpp"

namespace orthosmooth::theory {

enum class Branch { Spike, Slab };

enum class CurveKind { PriorGamma, LimitingNuDensity, LimitingNuMean };

std::string curve_kind_name(CurveKind kind);

struct DensityCurve {
    std::vector<double> grid;
    std::vector<double> values;
    CurveKind kind = CurveKind::PriorGamma;
    std::vector<std::pair<std::string, double>> metadata;
};

struct NullLimitInput {
    double w = 0.1;
    double z_sq = 0.0;
    PriorConfig prior;

    void validate() const;
};

/// log g(u) with g(u) = a2^a1 / Gamma(a1) u^(a1-1) exp(-a2 u), the gamma
/// density of tau^{-2}.
double log_base_gamma(double u, const PriorConfig& prior);

/// g1(u) = u^-2 g(1/u) for the slab and g0(u) = v0 u^-2 g(v0/u) for the
/// spike: the densities of gamma_k = I_k tau_k^2 on each branch.
double gamma_slab_density(double u, const PriorConfig& prior, Branch branch);

/// f(u | w) = (1 - w) g0(u) + w g1(u).
double gamma_mixture_density(double u, double w, const PriorConfig& prior);

/// Limiting posterior mean of nu_k given w under a null coefficient with
/// Z_k^2 = z_sq. Both integrals are taken over t = log(nu / (1 - nu)) with
/// the trapezoid rule on quad_points nodes; the result is compared against
/// 2 * quad_points nodes and PrecisionError is thrown if they differ by more
/// than 1e-4.
double limiting_null_mean(const NullLimitInput& input, int quad_points = 256);

/// Unnormalized limiting density of nu on `grid` (inside (0, 1)), normalized
/// to unit trapezoid area.
DensityCurve limiting_null_density(const NullLimitInput& input, std::span<const double> grid);

/// f(u | w) on a grid of positive u.
DensityCurve prior_density(double w, const PriorConfig& prior, std::span<const double> grid);

/// 25th, 50th, 75th, 90th, 95th and 99th percentiles of chi-square(1).
std::vector<double> chi_sq1_percentiles();

/// Geometric grid on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// Uniform grid strictly inside (lo, hi).
std::vector<double> open_grid(double lo, double hi, std::size_t count);

/// CSV with columns grid,value,kind; metadata as leading '#' rows.
std::string to_csv(const std::vector<DensityCurve>& curves);

}  // namespace orthosmooth::theory
