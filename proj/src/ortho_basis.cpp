#include "orthosmooth/ortho_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "orthosmooth/error.hpp"

namespace orthosmooth {

namespace {

std::size_t count_distinct(std::span<const double> x) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace

Eigen::VectorXd OrthoBasis::project(const Eigen::VectorXd& v) const {
    return values_.transpose() * v / static_cast<double>(n());
}

OrthogonalityDefect orthogonality_defect(const Eigen::MatrixXd& basis) {
    OrthogonalityDefect out;
    const double n = static_cast<double>(basis.rows());
    const Eigen::MatrixXd gram = basis.transpose() * basis;
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        out.max_column_sum = std::max(out.max_column_sum, std::abs(basis.col(k).sum()));
        out.max_diagonal_error = std::max(out.max_diagonal_error, std::abs(gram(k, k) - n));
        for (Eigen::Index l = 0; l < basis.cols(); ++l) {
            if (l != k) out.max_off_diagonal = std::max(out.max_off_diagonal, std::abs(gram(k, l)));
        }
    }
    return out;
}

// Lanczos form of the discrete Stieltjes three-term recurrence on unit
// vectors, with two classical Gram-Schmidt passes against all earlier
// columns (including the constant) after each step. The recurrence fixes the
// degree and sign; the reorthogonalization keeps B^T B = n I to rounding
// even for d ~ 25 on clustered designs.
OrthoBasis build_global(std::span<const double> x, int d) {
    const auto n = static_cast<Eigen::Index>(x.size());
    if (d < 1) throw SizeError("polynomial degree must be at least 1, got " + std::to_string(d));
    if (n <= d) {
        throw SizeError("need more points than basis columns: n = " + std::to_string(n) + ", d = " + std::to_string(d));
    }
    const std::size_t distinct = count_distinct(x);
    if (distinct < static_cast<std::size_t>(d) + 1) {
        throw RankError("degree " + std::to_string(d) + " basis needs at least " + std::to_string(d + 1) +
                        " distinct x values, found " + std::to_string(distinct));
    }

    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    const double shift = xv.mean();
    Eigen::VectorXd t = xv.array() - shift;
    const double scale = t.cwiseAbs().maxCoeff();
    t /= scale;

    Eigen::MatrixXd q(n, d + 1);
    q.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));

    double beta_prev = 0.0;
    for (int k = 1; k <= d; ++k) {
        Eigen::VectorXd v = t.cwiseProduct(q.col(k - 1));
        const double raw_norm = v.norm();
        const double alpha = q.col(k - 1).dot(v);
        v -= alpha * q.col(k - 1);
        if (k >= 2) v -= beta_prev * q.col(k - 2);
        for (int pass = 0; pass < 2; ++pass) {
            const Eigen::VectorXd coeffs = q.leftCols(k).transpose() * v;
            v.noalias() -= q.leftCols(k) * coeffs;
        }
        const double norm = v.norm();
        if (!(norm > 1e-13 * raw_norm)) {
            throw RankError("design is numerically rank deficient at degree " + std::to_string(k));
        }
        q.col(k) = v / norm;
        beta_prev = norm;
    }

    Eigen::MatrixXd values = q.rightCols(d) * std::sqrt(static_cast<double>(n));
    return OrthoBasis(std::move(values));
}

OrthoBasis build_local(std::span<const double> x_neighborhood, double center, int d) {
    if (x_neighborhood.size() <= static_cast<std::size_t>(d) + 1) {
        throw SizeError("local basis of degree " + std::to_string(d) + " needs more than " + std::to_string(d + 1) +
                        " points, got " + std::to_string(x_neighborhood.size()));
    }
    std::vector<double> shifted(x_neighborhood.begin(), x_neighborhood.end());
    for (double& v : shifted) v -= center;
    return build_global(shifted, d);
}

}  // namespace orthosmooth
