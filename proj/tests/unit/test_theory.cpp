#include <cmath>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "doctest.h"
#include "orthosmooth/error.hpp"
#include "orthosmooth/theory.hpp"
#include "support/oracles.hpp"

using namespace orthosmooth;
using namespace orthosmooth::theory;

namespace {

double integrate_half_line(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate([&](double u) { return u > 0.0 ? f(u) : 0.0; });
}

std::size_t argmax_in(const DensityCurve& c, double lo, double hi) {
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t j = 0; j < c.grid.size(); ++j) {
        if (c.grid[j] < lo || c.grid[j] > hi) continue;
        if (c.values[j] > best_v) {
            best_v = c.values[j];
            best = j;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("branch and mixture densities integrate to one") {
    const PriorConfig prior;
    for (Branch b : {Branch::Spike, Branch::Slab}) {
        const double mass = integrate_half_line([&](double u) { return gamma_slab_density(u, prior, b); });
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
    for (double w : {0.1, 0.25}) {
        const double mass = integrate_half_line([&](double u) { return gamma_mixture_density(u, w, prior); });
        CHECK(std::abs(mass - 1.0) < 1e-6);
    }
    // Non-integer shape goes through the gamma function.
    const PriorConfig odd{2.5, 3.0, 0.01};
    CHECK(std::abs(integrate_half_line([&](double u) { return gamma_slab_density(u, odd, Branch::Slab); }) - 1.0) < 1e-6);
    CHECK_THROWS_AS(gamma_slab_density(0.0, prior, Branch::Slab), DomainError);
    CHECK_THROWS_AS(gamma_slab_density(-1.0, prior, Branch::Spike), DomainError);
}

TEST_CASE("slab density matches the closed-form inverse gamma") {
    const PriorConfig prior;
    for (double u : {0.5, 3.0, 8.0, 40.0}) {
        // tau^2 ~ InvGamma(a1, a2): a2^a1 / Gamma(a1) u^{-a1-1} exp(-a2 / u).
        const double expected =
            std::exp(5 * std::log(50.0) - std::lgamma(5.0) - 6 * std::log(u) - 50.0 / u);
        CHECK(gamma_slab_density(u, prior, Branch::Slab) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("changing w moves peak heights, not peak locations") {
    const PriorConfig prior;
    const auto grid = log_grid(1e-3, 1e3, 4001);
    auto c1 = prior_density(0.1, prior, grid);
    auto c2 = prior_density(0.25, prior, grid);
    // Spike mode near v0 a2 / (a1 + 1) ~ 0.042, slab mode near a2 / (a1 + 1) ~ 8.3.
    const auto s1 = argmax_in(c1, 1e-3, 1.0), s2 = argmax_in(c2, 1e-3, 1.0);
    const auto l1 = argmax_in(c1, 1.0, 1e3), l2 = argmax_in(c2, 1.0, 1e3);
    CHECK(s1 == s2);
    CHECK(l1 == l2);
    CHECK(c1.grid[s1] == doctest::Approx(0.005 * 50 / 6).epsilon(0.01));
    CHECK(c1.grid[l1] == doctest::Approx(50.0 / 6).epsilon(0.01));
    CHECK(c1.values[s1] > c2.values[s2]);
    CHECK(c1.values[l1] < c2.values[l2]);
}

TEST_CASE("limiting null mean lies in (0, 1) and increases with z_sq") {
    double prev = 0.0;
    for (double z_sq : {0.1, 0.45, 1.32, 2.71, 3.84, 6.63}) {
        const double m = limiting_null_mean({0.1, z_sq, PriorConfig{}});
        CHECK(m > 0.0);
        CHECK(m < 1.0);
        CHECK(m > prev);
        prev = m;
    }
}

TEST_CASE("limiting null mean is stable under refinement") {
    for (double w : {0.05, 0.1, 0.5, 0.9}) {
        for (double z_sq : chi_sq1_percentiles()) {
            NullLimitInput in{w, z_sq, PriorConfig{}};
            CHECK(std::abs(limiting_null_mean(in, 128) - limiting_null_mean(in, 256)) < 1e-4);
            CHECK(std::abs(limiting_null_mean(in, 256) - limiting_null_mean(in, 512)) < 1e-4);
        }
    }
    CHECK_THROWS_AS(limiting_null_mean({0.1, 1.0, PriorConfig{}}, 32), DomainError);
    CHECK_THROWS_AS(limiting_null_mean({0.0, 1.0, PriorConfig{}}), DomainError);
    CHECK_THROWS_AS(limiting_null_mean({0.1, -1.0, PriorConfig{}}), DomainError);
}

TEST_CASE("limiting null mean agrees with importance sampling") {
    for (double z_sq : {0.1, 1.32, 6.63}) {
        const double q = limiting_null_mean({0.1, z_sq, PriorConfig{}});
        auto is = oracle::importance_null_mean(0.1, z_sq, 5.0, 50.0, 0.005, 400000, 77);
        CAPTURE(z_sq);
        CAPTURE(q);
        CAPTURE(is.mean);
        CHECK(std::abs(q - is.mean) < 3 * is.se);
    }
}

TEST_CASE("limiting null mean equals the exact d = 1 posterior given w") {
    // With w fixed, the posterior mean of nu for one coordinate with z^2 = z_sq
    // is the same ratio of integrals; check against the direct quadrature in
    // lambda = tau^{-2} at w = 1/2, where integrating w out changes nothing.
    const double z = 1.7;
    const double direct = oracle::exact_posterior_nu_d1(z, 5.0, 50.0, 0.005);
    const double limit = limiting_null_mean({0.5, z * z, PriorConfig{}});
    CHECK(limit == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("limiting null density") {
    const auto grid = open_grid(0.0, 1.0, 4000);
    const auto pct = chi_sq1_percentiles();
    auto c = limiting_null_density({0.1, pct[0], PriorConfig{}}, grid);
    double area = 0.0, low_mass = 0.0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double piece = 0.5 * (c.values[j] + c.values[j - 1]) * (grid[j] - grid[j - 1]);
        area += piece;
        if (grid[j] <= 0.5) low_mass += piece;
    }
    CHECK(std::abs(area - 1.0) < 1e-4);
    CHECK(low_mass > 0.5);
    int modes = 0;
    for (std::size_t j = 1; j + 1 < grid.size(); ++j) {
        if (c.values[j] > c.values[j - 1] && c.values[j] > c.values[j + 1]) ++modes;
    }
    CHECK(modes == 2);

    // Left mode shrinks and right mode grows as z_sq increases.
    auto hi = limiting_null_density({0.1, pct[5], PriorConfig{}}, grid);
    const auto left_lo = argmax_in(c, 0.0, 0.5), right_lo = argmax_in(c, 0.5, 1.0);
    const auto left_hi = argmax_in(hi, 0.0, 0.5), right_hi = argmax_in(hi, 0.5, 1.0);
    CHECK(c.values[left_lo] > hi.values[left_hi]);
    CHECK(c.values[right_lo] < hi.values[right_hi]);

    // z_sq = 0: proportional to (1 - nu)^{-3/2} f(nu / (1 - nu) | w).
    auto zero = limiting_null_density({0.1, 0.0, PriorConfig{}}, grid);
    const double r0 = zero.values[100] / (std::pow(1 - grid[100], -1.5) *
                                          gamma_mixture_density(grid[100] / (1 - grid[100]), 0.1, PriorConfig{}));
    for (std::size_t j : {500u, 2000u, 3500u}) {
        const double r = zero.values[j] / (std::pow(1 - grid[j], -1.5) *
                                           gamma_mixture_density(grid[j] / (1 - grid[j]), 0.1, PriorConfig{}));
        CHECK(r == doctest::Approx(r0).epsilon(1e-10));
    }

    std::vector<double> bad{0.2, 0.1};
    CHECK_THROWS_AS(limiting_null_density({0.1, 1.0, PriorConfig{}}, bad), DomainError);
    std::vector<double> outside{0.0, 0.5};
    CHECK_THROWS_AS(limiting_null_density({0.1, 1.0, PriorConfig{}}, outside), DomainError);
}

TEST_CASE("density CSV carries metadata rows") {
    auto c = prior_density(0.1, PriorConfig{}, log_grid(0.01, 10, 5));
    const std::string text = to_csv({c});
    CHECK(text.rfind("# curve 0: kind=prior_gamma w=0.1", 0) == 0);
    CHECK(text.find("grid,value,kind\n") != std::string::npos);
}
