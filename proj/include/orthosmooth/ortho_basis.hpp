#pragma once

#include <span>

#include <Eigen/Dense>

namespace orthosmooth {

/// Discrete orthogonal polynomial design matrix without a constant column.
///
/// Column k (0-based) holds a polynomial of exact degree k+1 evaluated at the
/// data points, with positive leading coefficient. Every column is orthogonal
/// to the constant vector and B^T B = n I.
class OrthoBasis {
public:
    OrthoBasis() = default;
    explicit OrthoBasis(Eigen::MatrixXd values) : values_(std::move(values)) {}

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Eigen::Index n() const noexcept { return values_.rows(); }
    Eigen::Index d() const noexcept { return values_.cols(); }
    bool centered() const noexcept { return true; }

    auto column(Eigen::Index k) const { return values_.col(k); }
    auto row(Eigen::Index i) const { return values_.row(i); }

    /// B^T v / n, the OLS coefficients of v under orthogonality.
    Eigen::VectorXd project(const Eigen::VectorXd& v) const;

private:
    Eigen::MatrixXd values_;
};

struct OrthogonalityDefect {
    double max_column_sum = 0.0;      // max_k |sum_i B_ik|
    double max_diagonal_error = 0.0;  // max_k |sum_i B_ik^2 - n|
    double max_off_diagonal = 0.0;    // max_{k != l} |(B^T B)_kl|
};

OrthogonalityDefect orthogonality_defect(const Eigen::MatrixXd& basis);

/// Degree-1..d orthogonal polynomials on x. Throws SizeError when n <= d
/// and RankError when x has fewer than d+1 distinct values.
OrthoBasis build_global(std::span<const double> x, int d);

/// Same contract as build_global on the shifted values x - center.
OrthoBasis build_local(std::span<const double> x_neighborhood, double center, int d);

}  // namespace orthosmooth
