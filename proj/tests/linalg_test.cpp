#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rigidmotion/graph.hpp"
#include "rigidmotion/linalg.hpp"
#include "support/oracles.hpp"

namespace rm = rigidmotion;
namespace la = rigidmotion::linalg;

TEST(NullSpace, IdentityHasEmptyKernel) {
  EXPECT_EQ(la::null_space(Eigen::MatrixXd::Identity(4, 4)).cols(), 0);
}

TEST(NullSpace, SingleRowOfOnes) {
  Eigen::MatrixXd m(1, 2);
  m << 1, 1;
  const Eigen::MatrixXd k = la::null_space(m);
  ASSERT_EQ(k.cols(), 1);
  const Eigen::Vector2d expected(1 / std::sqrt(2.0), -1 / std::sqrt(2.0));
  EXPECT_NEAR(std::abs(k.col(0).dot(expected)), 1.0, 1e-14);
}

TEST(NullSpace, TransposedKroneckerIncidenceOfSquareHoldsTranslations) {
  const rm::SensingGraph g = oracle::square_graph();
  const Eigen::MatrixXd bbar_t = oracle::kron_with_identity(oracle::incidence(g), 2).transpose();
  const Eigen::MatrixXd k = la::null_space(bbar_t);
  ASSERT_EQ(k.cols(), 2);
  EXPECT_LT((bbar_t * k).norm(), 1e-12);
  // Every kernel vector moves all four agents by the same displacement.
  for (Eigen::Index c = 0; c < k.cols(); ++c) {
    for (int i = 1; i < 4; ++i) {
      EXPECT_LT((k.col(c).segment<2>(2 * i) - k.col(c).segment<2>(0)).norm(), 1e-12);
    }
  }
}

TEST(NullSpace, BasisIsOrthonormalForRandomRankDeficientMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(6, 3, [&] {
      return std::uniform_real_distribution<double>(-1, 1)(rng);
    });
    const Eigen::MatrixXd m = a * a.transpose();  // 6×6, rank 3
    const Eigen::MatrixXd k = la::null_space(m);
    ASSERT_EQ(k.cols(), 3);
    EXPECT_LT((k.transpose() * k - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-12);
    EXPECT_LT((m * k).norm(), 1e-10 * m.norm());
  }
}

TEST(NullSpace, NoRowsMeansEverything) {
  EXPECT_EQ(la::null_space(Eigen::MatrixXd(0, 5)).cols(), 5);
}

TEST(ProjectOut, RemovesAwayDirection) {
  Eigen::MatrixXd away(2, 1);
  away << 1, 0;
  Eigen::MatrixXd candidate(2, 1);
  candidate << 1, 1;
  const Eigen::MatrixXd out = la::project_out(away, candidate);
  ASSERT_EQ(out.cols(), 1);
  EXPECT_NEAR(std::abs(out(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(out(0, 0), 0.0, 1e-15);
}

TEST(ProjectOut, CandidateInsideAwaySpanVanishes) {
  Eigen::MatrixXd away = Eigen::MatrixXd::Identity(3, 2);
  Eigen::MatrixXd candidate(3, 2);
  candidate << 1, 2, -3, 0.5, 0, 0;
  EXPECT_EQ(la::project_out(away, candidate).cols(), 0);
}

TEST(ProjectOut, OutputIsOrthogonalToAway) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd raw = Eigen::MatrixXd::NullaryExpr(10, 4, [&] {
      return std::uniform_real_distribution<double>(-1, 1)(rng);
    });
    const Eigen::MatrixXd away = la::orthonormalize(raw);
    const Eigen::MatrixXd candidate = Eigen::MatrixXd::NullaryExpr(10, 5, [&] {
      return std::uniform_real_distribution<double>(-1, 1)(rng);
    });
    const Eigen::MatrixXd out = la::project_out(away, candidate);
    EXPECT_EQ(out.cols(), 5);
    EXPECT_LT((away.transpose() * out).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT((out.transpose() * out - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-12);
  }
}

TEST(NumericalRank, MatchesGramOracle) {
  std::mt19937_64 rng(3);
  for (int rank = 0; rank <= 4; ++rank) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(7, 5);
    for (int r = 0; r < rank; ++r) {
      m += oracle::uniform_vector(rng, 7, -1, 1) * oracle::uniform_vector(rng, 5, -1, 1).transpose();
    }
    EXPECT_EQ(la::numerical_rank(m, 1e-10), rank);
    if (rank > 0) EXPECT_EQ(oracle::gram_rank(m), rank);
  }
}
