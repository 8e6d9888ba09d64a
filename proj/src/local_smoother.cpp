#include "orthosmooth/local_smoother.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "orthosmooth/error.hpp"
#include "orthosmooth/ortho_basis.hpp"

namespace orthosmooth {

void LocalConfig::validate() const {
    if (!(h > 0.0)) throw ConfigError("bandwidth h must be > 0");
    if (d < 1) throw ConfigError("local degree must be >= 1");
    if (resolved_min_neighbors() < d + 2) {
        throw ConfigError("min_neighbors must be >= d + 2 (" + std::to_string(d + 2) + ")");
    }
    prior.validate();
    mcmc.validate();
}

std::vector<std::size_t> neighborhood(const Dataset& data, std::size_t i, double h) {
    const auto& pts = data.points();
    const double xi = pts[i].x;
    // Both predicates are monotone in j because x is sorted.
    auto first = std::partition_point(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i),
                                      [xi, h](const Point& p) { return !(std::abs(p.x - xi) < h); });
    auto last = std::partition_point(pts.begin() + static_cast<std::ptrdiff_t>(i), pts.end(),
                                     [xi, h](const Point& p) { return std::abs(p.x - xi) < h; });
    std::vector<std::size_t> out(static_cast<std::size_t>(last - first));
    std::iota(out.begin(), out.end(), static_cast<std::size_t>(first - pts.begin()));
    if (out.empty()) out.push_back(i);  // only if h is not positive
    return out;
}

std::vector<std::size_t> widened_neighborhood(const Dataset& data, std::size_t i, double h, std::size_t min_neighbors) {
    auto window = neighborhood(data, i, h);
    if (window.size() >= min_neighbors) return window;
    if (data.size() < min_neighbors) {
        throw SizeError("dataset has " + std::to_string(data.size()) + " points, fewer than min_neighbors = " +
                        std::to_string(min_neighbors));
    }
    const auto& pts = data.points();
    const double xi = pts[i].x;
    // Nearest points in a sorted design form a contiguous run around i.
    std::size_t lo = i, hi = i + 1;
    while (hi - lo < min_neighbors) {
        const double left = lo > 0 ? xi - pts[lo - 1].x : std::numeric_limits<double>::infinity();
        const double right = hi < pts.size() ? pts[hi].x - xi : std::numeric_limits<double>::infinity();
        if (left <= right) --lo;
        else ++hi;
    }
    std::vector<std::size_t> out(hi - lo);
    std::iota(out.begin(), out.end(), lo);
    return out;
}

double rice_variance(const Dataset& data, std::span<const std::size_t> nbhd) {
    if (nbhd.size() < 2) throw SizeError("Rice estimator needs at least 2 points");
    std::vector<std::size_t> order(nbhd.begin(), nbhd.end());
    std::stable_sort(order.begin(), order.end(),
                     [&data](std::size_t a, std::size_t b) { return data[a].x < data[b].x; });
    double ss = 0.0;
    for (std::size_t j = 1; j < order.size(); ++j) {
        const double diff = data[order[j]].y - data[order[j - 1]].y;
        ss += diff * diff;
    }
    return ss / (2.0 * static_cast<double>(order.size() - 1));
}

double rice_sigma(const Dataset& data, std::span<const std::size_t> nbhd) { return std::sqrt(rice_variance(data, nbhd)); }

std::uint64_t point_seed(std::uint64_t seed, std::size_t i) {
    // splitmix64 finalizer
    std::uint64_t z = static_cast<std::uint64_t>(i) + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return seed ^ z;
}

LocalFit fit_point(const Dataset& data, std::size_t i, const LocalConfig& cfg, const GibbsOptions& options) {
    cfg.validate();
    if (i >= data.size()) throw DomainError("point index " + std::to_string(i) + " out of range");

    LocalFit fit;
    fit.i = i;
    const auto min_nb = static_cast<std::size_t>(cfg.resolved_min_neighbors());
    fit.widened = neighborhood(data, i, cfg.h).size() < min_nb;
    fit.neighborhood = widened_neighborhood(data, i, cfg.h, min_nb);
    fit.n_i = fit.neighborhood.size();
    fit.position = static_cast<std::size_t>(
        std::find(fit.neighborhood.begin(), fit.neighborhood.end(), i) - fit.neighborhood.begin());

    const auto n_i = static_cast<Eigen::Index>(fit.n_i);
    Eigen::VectorXd x(n_i), y(n_i);
    for (Eigen::Index j = 0; j < n_i; ++j) {
        x[j] = data[fit.neighborhood[static_cast<std::size_t>(j)]].x;
        y[j] = data[fit.neighborhood[static_cast<std::size_t>(j)]].y;
    }
    fit.y_bar_i = y.mean();
    fit.sigma_i = rice_sigma(data, fit.neighborhood);

    if (fit.sigma_i == 0.0) {
        fit.degenerate = true;
        fit.V = Eigen::VectorXd::Zero(cfg.d);
        fit.f_hat = fit.y_bar_i;
        fit.dof_i = 0.0;
        return fit;
    }

    OrthoBasis basis;
    try {
        basis = build_local(std::span<const double>(x.data(), fit.n_i), data[i].x, cfg.d);
    } catch (const RankError& e) {
        throw RankError("point " + std::to_string(i) + ": " + e.what());
    }

    const Eigen::VectorXd centered = y.array() - fit.y_bar_i;
    const Eigen::VectorXd y_star = centered * (std::sqrt(static_cast<double>(n_i)) / fit.sigma_i);

    McmcConfig mcmc = cfg.mcmc;
    mcmc.seed = point_seed(cfg.mcmc.seed, i);
    fit.summary = back_transform(gibbs_fit(y_star, basis, cfg.prior, mcmc, options), fit.sigma_i, n_i);
    fit.V = fit.summary.V;
    fit.dof_i = fit.summary.dof;
    fit.f_hat = fit.y_bar_i + basis.row(static_cast<Eigen::Index>(fit.position)).dot(fit.summary.beta_hat);
    return fit;
}

CurveFit fit_curve(const Dataset& data, const LocalConfig& cfg, unsigned jobs, const GibbsOptions& options) {
    cfg.validate();
    const std::size_t n = data.size();
    std::vector<LocalFit> fits(n);
    std::vector<std::string> errors(n);
    std::vector<ErrorKind> kinds(n, ErrorKind::Numerical);
    std::vector<char> failed(n, 0);

    auto work = [&](std::size_t i) {
        try {
            fits[i] = fit_point(data, i, cfg, options);
        } catch (const Error& e) {
            failed[i] = 1;
            errors[i] = e.what();
            kinds[i] = e.kind();
        }
    };

    jobs = std::max(1u, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) work(i);
            });
        }
        for (auto& th : pool) th.join();
    }

    CurveFit out;
    out.fitted.resize(n);
    out.dof_curve.x.resize(n);
    out.dof_curve.dof.resize(n);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < n; ++i) {
        if (failed[i]) {
            fits[i] = LocalFit{};
            fits[i].i = i;
            fits[i].f_hat = nan;
            fits[i].dof_i = nan;
            out.failures.push_back({i, kinds[i], errors[i]});
        }
        out.fitted[i] = fits[i].f_hat;
        out.dof_curve.x[i] = data[i].x;
        out.dof_curve.dof[i] = fits[i].dof_i;
    }
    out.fits = std::move(fits);

    if (out.failures.size() * 10 > n) {
        std::string msg = std::to_string(out.failures.size()) + " of " + std::to_string(n) +
                          " local fits failed; first at point " + std::to_string(out.failures.front().i) + ": " +
                          out.failures.front().message;
        throw Error(out.failures.front().kind, msg);
    }
    return out;
}

}  // namespace orthosmooth
