#include "orthosmooth/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "orthosmooth/csv_io.hpp"
#include "orthosmooth/error.hpp"

namespace orthosmooth::theory {

namespace {

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_branch(double u, const PriorConfig& prior, Branch branch) {
    const double scale = branch == Branch::Slab ? 1.0 : prior.v0;
    return std::log(scale) - 2.0 * std::log(u) + log_base_gamma(scale / u, prior);
}

double log_mixture(double u, double w, const PriorConfig& prior) {
    return log_sum_exp(std::log1p(-w) + log_branch(u, prior, Branch::Spike),
                       std::log(w) + log_branch(u, prior, Branch::Slab));
}

// In t = log u with u = nu / (1 - nu), the limiting-mean integrand becomes
// exp(nu z^2 / 2) (1 + u)^{-1/2} f(u | w) u, which decays doubly
// exponentially as t -> -inf and like u^{-(a1 + 1/2)} as t -> +inf.
double trapezoid_mean(const NullLimitInput& in, int nodes) {
    const PriorConfig& p = in.prior;
    const double rate = p.a1 + 0.5;
    const double t_lo = std::log(p.v0 * p.a2 / (p.a1 + 1.0)) - 4.0;
    const double t_hi = std::log(p.a2 / (p.a1 + 1.0)) + (40.0 + 0.5 * in.z_sq) / rate;
    const double step = (t_hi - t_lo) / static_cast<double>(nodes - 1);

    std::vector<double> log_h(static_cast<std::size_t>(nodes));
    std::vector<double> nu(static_cast<std::size_t>(nodes));
    double peak = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < nodes; ++j) {
        const double t = t_lo + step * j;
        const double u = std::exp(t);
        const double v = u / (1.0 + u);
        nu[static_cast<std::size_t>(j)] = v;
        const double lh = 0.5 * v * in.z_sq - 0.5 * std::log1p(u) + log_mixture(u, in.w, p) + t;
        log_h[static_cast<std::size_t>(j)] = lh;
        peak = std::max(peak, lh);
    }
    double num = 0.0, den = 0.0;
    for (int j = 0; j < nodes; ++j) {
        const double weight = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
        const double h = weight * std::exp(log_h[static_cast<std::size_t>(j)] - peak);
        num += nu[static_cast<std::size_t>(j)] * h;
        den += h;
    }
    return num / den;
}

}  // namespace

std::string curve_kind_name(CurveKind kind) {
    switch (kind) {
        case CurveKind::PriorGamma: return "prior_gamma";
        case CurveKind::LimitingNuDensity: return "limiting_nu_density";
        case CurveKind::LimitingNuMean: return "limiting_nu_mean";
    }
    return "unknown";
}

void NullLimitInput::validate() const {
    prior.validate();
    if (!(w > 0.0 && w < 1.0)) throw DomainError("w must lie in (0, 1)");
    if (!(z_sq >= 0.0) || !std::isfinite(z_sq)) throw DomainError("z_sq must be finite and >= 0");
}

double log_base_gamma(double u, const PriorConfig& prior) {
    return prior.a1 * std::log(prior.a2) - std::lgamma(prior.a1) + (prior.a1 - 1.0) * std::log(u) - prior.a2 * u;
}

double gamma_slab_density(double u, const PriorConfig& prior, Branch branch) {
    if (!(u > 0.0)) throw DomainError("density argument must be > 0");
    return std::exp(log_branch(u, prior, branch));
}

double gamma_mixture_density(double u, double w, const PriorConfig& prior) {
    if (!(u > 0.0)) throw DomainError("density argument must be > 0");
    if (!(w >= 0.0 && w <= 1.0)) throw DomainError("w must lie in [0, 1]");
    return (1.0 - w) * gamma_slab_density(u, prior, Branch::Spike) + w * gamma_slab_density(u, prior, Branch::Slab);
}

double limiting_null_mean(const NullLimitInput& input, int quad_points) {
    input.validate();
    if (quad_points < 64) throw DomainError("quad_points must be >= 64");
    const double coarse = trapezoid_mean(input, quad_points);
    const double fine = trapezoid_mean(input, 2 * quad_points);
    if (!std::isfinite(coarse) || std::abs(coarse - fine) > 1e-4) {
        throw PrecisionError("limiting mean quadrature did not converge: " + std::to_string(coarse) + " vs " +
                             std::to_string(fine));
    }
    return coarse;
}

DensityCurve limiting_null_density(const NullLimitInput& input, std::span<const double> grid) {
    input.validate();
    if (grid.size() < 2) throw DomainError("density grid needs at least 2 points");
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!(grid[j] > 0.0 && grid[j] < 1.0)) throw DomainError("density grid must lie inside (0, 1)");
        if (j > 0 && !(grid[j] > grid[j - 1])) throw DomainError("density grid must be strictly increasing");
    }

    DensityCurve out;
    out.kind = CurveKind::LimitingNuDensity;
    out.grid.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    std::vector<double> logs(grid.size());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double v = grid[j];
        logs[j] = 0.5 * v * input.z_sq - 1.5 * std::log1p(-v) + log_mixture(v / (1.0 - v), input.w, input.prior);
        peak = std::max(peak, logs[j]);
    }
    for (std::size_t j = 0; j < grid.size(); ++j) out.values[j] = std::exp(logs[j] - peak);
    double area = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        area += 0.5 * (out.values[j] + out.values[j - 1]) * (grid[j] - grid[j - 1]);
    }
    if (!(area > 0.0) || !std::isfinite(area)) throw PrecisionError("limiting density has zero mass on the grid");
    for (double& v : out.values) v /= area;
    out.metadata = {{"w", input.w}, {"z_sq", input.z_sq}, {"a1", input.prior.a1}, {"a2", input.prior.a2},
                    {"v0", input.prior.v0}};
    return out;
}

DensityCurve prior_density(double w, const PriorConfig& prior, std::span<const double> grid) {
    prior.validate();
    DensityCurve out;
    out.kind = CurveKind::PriorGamma;
    out.grid.assign(grid.begin(), grid.end());
    out.values.reserve(grid.size());
    for (double u : grid) out.values.push_back(gamma_mixture_density(u, w, prior));
    out.metadata = {{"w", w}, {"a1", prior.a1}, {"a2", prior.a2}, {"v0", prior.v0}};
    return out;
}

std::vector<double> chi_sq1_percentiles() {
    return {0.101531044267621, 0.454936423119573, 1.32330369693147,
            2.70554345409541,  3.84145882069412,  6.63489660102121};
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t j = 0; j < count; ++j) {
        g[j] = std::exp(a + (b - a) * static_cast<double>(j) / static_cast<double>(count - 1));
    }
    return g;
}

std::vector<double> open_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    const double step = (hi - lo) / static_cast<double>(count + 1);
    for (std::size_t j = 0; j < count; ++j) g[j] = lo + step * static_cast<double>(j + 1);
    return g;
}

std::string to_csv(const std::vector<DensityCurve>& curves) {
    csv::Table table({"grid", "value", "kind"});
    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::string meta = "curve " + std::to_string(c) + ": kind=" + curve_kind_name(curves[c].kind);
        for (const auto& [key, value] : curves[c].metadata) meta += " " + key + "=" + csv::format(value);
        table.add_comment(meta);
    }
    for (const auto& curve : curves) {
        const std::string kind = curve_kind_name(curve.kind);
        for (std::size_t j = 0; j < curve.grid.size(); ++j) {
            table.add_row(std::vector<std::string>{csv::format(curve.grid[j]), csv::format(curve.values[j]), kind});
        }
    }
    return table.str();
}

}  // namespace orthosmooth::theory
