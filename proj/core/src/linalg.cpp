#include "rigidmotion/linalg.hpp"

#include <algorithm>
#include <limits>

namespace rigidmotion::linalg {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

int numerical_rank(const Eigen::MatrixXd& m, double relative_tol) {
  const Eigen::VectorXd sv = singular_values(m);
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  const double cutoff = relative_tol * sv(0);
  return static_cast<int>((sv.array() > cutoff).count());
}

double default_rank_tolerance(const Eigen::MatrixXd& m) {
  return static_cast<double>(std::max(m.rows(), m.cols())) *
         std::numeric_limits<double>::epsilon();
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& m, double relative_tol) {
  const auto cols = m.cols();
  if (m.rows() == 0) return Eigen::MatrixXd::Identity(cols, cols);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? relative_tol * sv(0) : 0.0;
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return svd.matrixV().rightCols(cols - rank);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns, double abs_tol) {
  if (columns.cols() == 0) return Eigen::MatrixXd(columns.rows(), 0);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > abs_tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

Eigen::MatrixXd project_out(const Eigen::MatrixXd& away,
                            const Eigen::MatrixXd& candidate, double abs_tol) {
  Eigen::MatrixXd projected = candidate;
  if (away.cols() > 0) {
    // Two passes keep the result orthogonal to `away` at round-off level.
    for (int pass = 0; pass < 2; ++pass) {
      projected -= away * (away.transpose() * projected);
    }
  }
  Eigen::MatrixXd basis = orthonormalize(projected, abs_tol);
  if (away.cols() > 0 && basis.cols() > 0) {
    basis -= away * (away.transpose() * basis);
    basis = orthonormalize(basis, abs_tol);
  }
  return basis;
}

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const auto rows = a.cols() > 0 ? a.rows() : b.rows();
  Eigen::MatrixXd out(rows, a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

}  // namespace rigidmotion::linalg
