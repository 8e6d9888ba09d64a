#pragma once

// Independent reference computations used only by the test suites. Nothing
// here calls into the sampler or the quadrature in the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>

namespace oracle {

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

inline double normal_pdf(double x, double var) {
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * M_PI * var);
}

inline double gamma_pdf_rate(double lambda, double shape, double rate) {
    return std::exp(shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(lambda) - rate * lambda);
}

/// Exact posterior mean of nu = gamma / (1 + gamma) for a single orthogonal
/// coordinate with sufficient statistic z ~ N(beta, 1), beta | gamma ~
/// N(0, gamma). beta is integrated out analytically (z | gamma ~
/// N(0, 1 + gamma)); the remaining integral runs over w in [0, 1] (Gauss-
/// Legendre) and over the precision lambda = tau^{-2} ~ Gamma(a1, rate a2) on
/// each branch I in {v0, 1} (exp-sinh on [0, inf)).
inline double exact_posterior_nu_d1(double z, double a1, double a2, double v0) {
    boost::math::quadrature::exp_sinh<double> half_line;
    auto branch = [&](double scale, bool with_nu) {
        auto f = [&](double lambda) {
            if (lambda <= 0.0) return 0.0;
            const double gamma = scale / lambda;
            const double nu = gamma / (1.0 + gamma);
            const double val = gamma_pdf_rate(lambda, a1, a2) * normal_pdf(z, 1.0 + gamma);
            return with_nu ? nu * val : val;
        };
        return half_line.integrate(f);
    };
    const double slab_num = branch(1.0, true), slab_den = branch(1.0, false);
    const double spike_num = branch(v0, true), spike_den = branch(v0, false);
    auto over_w = [&](bool numerator) {
        auto g = [&](double w) {
            return numerator ? (w * slab_num + (1.0 - w) * spike_num) : (w * slab_den + (1.0 - w) * spike_den);
        };
        return boost::math::quadrature::gauss<double, 20>::integrate(g, 0.0, 1.0);
    };
    return over_w(true) / over_w(false);
}

/// Exact joint posterior means V_k for d orthogonal coordinates sharing w.
/// Given w the coordinates are independent, and each marginal likelihood is
/// linear in w, so the posterior of w is a degree-d polynomial on [0, 1]:
/// 32-point Gauss-Legendre integrates it exactly for d <= 62.
inline std::vector<double> exact_posterior_V(const std::vector<double>& z, double a1, double a2, double v0) {
    boost::math::quadrature::exp_sinh<double> half_line;
    const std::size_t d = z.size();
    std::vector<double> m1(d), m0(d), n1(d), n0(d);
    for (std::size_t k = 0; k < d; ++k) {
        auto branch = [&](double scale, bool with_nu) {
            auto f = [&](double lambda) {
                if (lambda <= 0.0) return 0.0;
                const double gamma = scale / lambda;
                const double val = gamma_pdf_rate(lambda, a1, a2) * normal_pdf(z[k], 1.0 + gamma);
                return with_nu ? val * gamma / (1.0 + gamma) : val;
            };
            return half_line.integrate(f);
        };
        m1[k] = branch(1.0, false);
        m0[k] = branch(v0, false);
        n1[k] = branch(1.0, true);
        n0[k] = branch(v0, true);
        // Common per-coordinate factors cancel in every ratio below.
        const double s = std::max(m1[k], m0[k]);
        m1[k] /= s;
        m0[k] /= s;
        n1[k] /= s;
        n0[k] /= s;
    }
    using GL = boost::math::quadrature::gauss<double, 32>;
    auto joint = [&](double w) {
        double p = 1.0;
        for (std::size_t k = 0; k < d; ++k) p *= w * m1[k] + (1.0 - w) * m0[k];
        return p;
    };
    const double den = GL::integrate(joint, 0.0, 1.0);
    std::vector<double> V(d);
    for (std::size_t k = 0; k < d; ++k) {
        auto num = [&](double w) {
            double p = w * n1[k] + (1.0 - w) * n0[k];
            for (std::size_t j = 0; j < d; ++j) {
                if (j != k) p *= w * m1[j] + (1.0 - w) * m0[j];
            }
            return p;
        };
        V[k] = GL::integrate(num, 0.0, 1.0) / den;
    }
    return V;
}

/// Pearson chi-square p-value for samples against a CDF using `bins`
/// equiprobable bins defined through the quantile function.
inline double chi_square_p_value(const std::vector<double>& samples, const std::function<double(double)>& quantile,
                                 int bins) {
    std::vector<double> edges;
    for (int b = 1; b < bins; ++b) edges.push_back(quantile(static_cast<double>(b) / bins));
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double s : samples) {
        auto it = std::upper_bound(edges.begin(), edges.end(), s);
        counts[static_cast<std::size_t>(it - edges.begin())] += 1.0;
    }
    const double expected = static_cast<double>(samples.size()) / bins;
    double stat = 0.0;
    for (double c : counts) stat += (c - expected) * (c - expected) / expected;
    boost::math::chi_squared dist(bins - 1);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// One-degree-of-freedom Pearson test for a Bernoulli(p) count.
inline double bernoulli_p_value(std::size_t successes, std::size_t trials, double p) {
    const double e1 = p * static_cast<double>(trials);
    const double e0 = (1.0 - p) * static_cast<double>(trials);
    const double s = static_cast<double>(successes);
    const double f = static_cast<double>(trials) - s;
    const double stat = (s - e1) * (s - e1) / e1 + (f - e0) * (f - e0) / e0;
    boost::math::chi_squared dist(1);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// Importance-sampling estimate of the limiting null mean of nu: gamma is
/// drawn from its prior given w, and each draw is weighted by the marginal
/// likelihood ratio exp(nu z^2 / 2) (1 + gamma)^{-1/2}.
struct ImportanceEstimate {
    double mean;
    double se;
};

inline ImportanceEstimate importance_null_mean(double w, double z_sq, double a1, double a2, double v0,
                                               std::size_t draws, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> precision(a1, 1.0 / a2);
    std::bernoulli_distribution slab(w);
    std::vector<double> wt(draws), nu(draws);
    double sw = 0.0, swn = 0.0;
    for (std::size_t j = 0; j < draws; ++j) {
        const double gamma = (slab(rng) ? 1.0 : v0) / precision(rng);
        nu[j] = gamma / (1.0 + gamma);
        wt[j] = std::exp(0.5 * nu[j] * z_sq) / std::sqrt(1.0 + gamma);
        sw += wt[j];
        swn += wt[j] * nu[j];
    }
    const double mean = swn / sw;
    double var = 0.0;
    for (std::size_t j = 0; j < draws; ++j) {
        const double r = wt[j] * (nu[j] - mean);
        var += r * r;
    }
    return {mean, std::sqrt(var) / sw};
}

}  // namespace oracle
