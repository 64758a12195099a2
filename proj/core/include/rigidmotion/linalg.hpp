#pragma once

#include <Eigen/Dense>

namespace rigidmotion::linalg {

/// Relative cutoff used for null spaces of the design matrices.
inline constexpr double kNullSpaceTolerance = 1e-9;

/// Absolute cutoff below which a projected vector is considered zero.
inline constexpr double kProjectionTolerance = 1e-9;

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m);

/// Counts singular values strictly greater than `relative_tol * sigma_max`.
/// An all-zero matrix has rank 0.
int numerical_rank(const Eigen::MatrixXd& m, double relative_tol);

/// Default rank cutoff max(rows, cols) * eps, relative to sigma_max.
double default_rank_tolerance(const Eigen::MatrixXd& m);

/// Orthonormal basis (as columns) of {x : m x = 0}. Singular values at or
/// below `relative_tol * sigma_max` are treated as zero.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& m,
                           double relative_tol = kNullSpaceTolerance);

/// Orthonormal basis of span(columns), dropping directions whose singular
/// value is at or below `abs_tol`.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns,
                               double abs_tol = kProjectionTolerance);

/// Orthonormal basis of (I - A A^T) span(candidate), where A = `away` has
/// orthonormal columns. Directions shorter than `abs_tol` after projection
/// are discarded.
Eigen::MatrixXd project_out(const Eigen::MatrixXd& away,
                            const Eigen::MatrixXd& candidate,
                            double abs_tol = kProjectionTolerance);

/// Column-wise concatenation; either side may have zero columns.
Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace rigidmotion::linalg
