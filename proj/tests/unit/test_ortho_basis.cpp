#include <cmath>
#include <random>

#include "doctest.h"
#include "orthosmooth/error.hpp"
#include "orthosmooth/ortho_basis.hpp"
#include "support/oracles.hpp"

using namespace orthosmooth;

namespace {

void check_orthonormal(const OrthoBasis& b, double tol_offdiag = 1e-8) {
    const double n = static_cast<double>(b.n());
    const auto defect = orthogonality_defect(b.values());
    CHECK(defect.max_column_sum < 1e-10 * n);
    CHECK(defect.max_diagonal_error < 1e-10 * n);
    CHECK(defect.max_off_diagonal < tol_offdiag * n);
}

// k-th divided difference over k+1 nodes: the leading coefficient of a
// degree-k polynomial.
double divided_difference(std::vector<double> x, std::vector<double> f) {
    const std::size_t m = x.size();
    for (std::size_t level = 1; level < m; ++level) {
        for (std::size_t i = m - 1; i >= level; --i) {
            f[i] = (f[i] - f[i - 1]) / (x[i] - x[i - level]);
        }
    }
    return f[m - 1];
}

}  // namespace

TEST_CASE("three symmetric points, degree 1") {
    std::vector<double> x{-1.0, 0.0, 1.0};
    auto b = build_global(x, 1);
    REQUIRE(b.n() == 3);
    REQUIRE(b.d() == 1);
    CHECK(b.values()(0, 0) == doctest::Approx(-std::sqrt(1.5)).epsilon(1e-14));
    CHECK(std::abs(b.values()(1, 0)) < 1e-15);
    CHECK(b.values()(2, 0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
}

TEST_CASE("four points, degree 1 is proportional to (-3,-1,1,3)") {
    std::vector<double> x{1, 2, 3, 4};
    auto b = build_global(x, 1);
    const double s = std::sqrt(4.0 / 20.0);
    const double expected[] = {-3 * s, -1 * s, 1 * s, 3 * s};
    for (int i = 0; i < 4; ++i) CHECK(b.values()(i, 0) == doctest::Approx(expected[i]).epsilon(1e-14));
}

TEST_CASE("local basis is shift invariant") {
    std::vector<double> nb{1.0, 2.0, 3.0};
    auto local = build_local(nb, 2.0, 1);
    auto global = build_global(std::vector<double>{-1.0, 0.0, 1.0}, 1);
    CHECK((local.values() - global.values()).cwiseAbs().maxCoeff() < 1e-14);

    std::vector<double> x = oracle::linspace(0.0, 3.0, 40);
    std::vector<double> shifted = x;
    for (double& v : shifted) v += 1234.5;
    auto a = build_global(x, 6);
    auto c = build_global(shifted, 6);
    CHECK((a.values() - c.values()).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(build_local(std::vector<double>{2, 2, 2, 2, 2}, 2.0, 1), RankError);
    CHECK_THROWS_AS(build_global(std::vector<double>{1, 1, 2, 2, 2}, 2), RankError);
    CHECK_THROWS_AS(build_global(std::vector<double>{1, 2, 3}, 3), SizeError);
    CHECK_THROWS_AS(build_local(std::vector<double>{1, 2, 3}, 2.0, 2), SizeError);
    CHECK_THROWS_AS(build_global(std::vector<double>{1, 2, 3}, 0), SizeError);
}

TEST_CASE("random 20-point neighborhood, degree 3") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> x(20);
    for (double& v : x) v = u(rng);
    auto b = build_local(x, 0.1, 3);
    Eigen::MatrixXd gram = b.values().transpose() * b.values();
    CHECK((gram - 20.0 * Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    check_orthonormal(b);
}

TEST_CASE("degree nesting") {
    std::vector<double> x = oracle::linspace(-2.0, 5.0, 60);
    auto full = build_global(x, 12);
    for (int k = 1; k <= 12; ++k) {
        auto part = build_global(x, k);
        CHECK((full.values().leftCols(k) - part.values()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("columns have exact degree and positive leading coefficient") {
    std::vector<double> x = oracle::linspace(0.0, 1.0, 30);
    auto b = build_global(x, 6);
    for (int k = 1; k <= 6; ++k) {
        // Degree-k column: the (k+1)-th divided difference vanishes, the k-th is positive.
        std::vector<double> nodes, vals, nodes2, vals2;
        for (int j = 0; j <= k; ++j) {
            const auto idx = static_cast<std::size_t>(j * 29 / k);
            nodes.push_back(x[idx]);
            vals.push_back(b.values()(static_cast<Eigen::Index>(idx), k - 1));
        }
        CHECK(divided_difference(nodes, vals) > 0.0);
        for (int j = 0; j <= k + 1; ++j) {
            const auto idx = static_cast<std::size_t>(j * 29 / (k + 1));
            nodes2.push_back(x[idx]);
            vals2.push_back(b.values()(static_cast<Eigen::Index>(idx), k - 1));
        }
        CHECK(std::abs(divided_difference(nodes2, vals2)) < 1e-6 * std::abs(divided_difference(nodes, vals)) + 1e-6);
    }
}

TEST_CASE("clustered design with d = 25 stays orthogonal") {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> cluster(0.0, 0.01);
    std::vector<double> x;
    const double centers[] = {-3.0, -1.0, 0.5, 2.0, 6.0};
    for (int i = 0; i < 200; ++i) x.push_back(centers[i % 5] + cluster(rng));
    std::sort(x.begin(), x.end());
    auto b = build_global(x, 25);
    check_orthonormal(b);
}

TEST_CASE("project returns OLS coefficients") {
    std::vector<double> x = oracle::linspace(0.0, 1.0, 25);
    auto b = build_global(x, 4);
    Eigen::VectorXd coef(4);
    coef << 1.5, -0.3, 0.0, 2.0;
    Eigen::VectorXd y = b.values() * coef;
    CHECK((b.project(y) - coef).cwiseAbs().maxCoeff() < 1e-12);
}
