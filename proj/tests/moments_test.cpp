#include <gtest/gtest.h>

#include "outlook/moments.hpp"
#include "test_support.hpp"

using namespace outlook;

TEST(ClassMoments, HandComputedPair) {
  Matrix rows(2, 2);
  rows << 0, 0, 2, 0;
  const auto m = class_moments(rows);
  EXPECT_EQ(m.mean, Eigen::Vector2d(1, 0));
  Matrix expected(2, 2);
  expected << 1, 0, 0, 0;
  EXPECT_EQ(m.covariance, expected);
  EXPECT_EQ(m.count, 2);
}

TEST(ClassMoments, RepeatedRowHasZeroCovariance) {
  const Matrix rows = RowVector::Constant(3, 2.5).replicate(4, 1);
  EXPECT_EQ(class_moments(rows).covariance, Matrix::Zero(3, 3));
}

TEST(ClassMoments, MatchesNaiveDoubleLoop) {
  const Matrix x = outlook::testing::random_matrix(50, 3, 17);
  const auto m = class_moments(x);
  const double n = static_cast<double>(x.rows());
  std::vector<double> mean(3, 0.0);
  for (Index r = 0; r < x.rows(); ++r)
    for (int j = 0; j < 3; ++j) mean[j] += x(r, j) / n;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (Index r = 0; r < x.rows(); ++r) s += (x(r, a) - mean[a]) * (x(r, b) - mean[b]);
      EXPECT_NEAR(m.covariance(a, b), s / n, 1e-12);
    }
    EXPECT_NEAR(m.mean(a), mean[a], 1e-14);
  }
}

TEST(ClassMoments, NeedsTwoRows) {
  EXPECT_THROW(class_moments(Matrix::Ones(1, 2)), InputError);
  EXPECT_THROW(column_mean(Matrix(0, 2)), InputError);
}

TEST(Utilization, AxisAlignedLeadingDirection) {
  const Matrix cov = Eigen::Vector2d(3, 1).asDiagonal();
  const auto u = utilization_matrix(cov, 1);
  EXPECT_EQ(u.directions, Matrix(Eigen::Vector2d(1, 0)));
  const auto full = utilization_matrix(cov, 2);
  EXPECT_EQ(full.directions, Matrix(Matrix::Identity(2, 2)));
  EXPECT_EQ(full.eigenvalues, Eigen::Vector2d(3, 1));
  EXPECT_FALSE(full.rank_deficient);
  EXPECT_FALSE(full.near_degenerate);
}

TEST(Utilization, EigenResidualsOnRandomPsd) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = outlook::testing::random_matrix(4, 6, seed);
    const Matrix cov = a * a.transpose();
    const auto u = utilization_matrix(cov, 2);
    for (Index l = 0; l < 2; ++l) {
      const Vector v = u.directions.col(l);
      EXPECT_LT((cov * v - u.eigenvalues(l) * v).norm(), 1e-8);
      Index big = 0;
      v.cwiseAbs().maxCoeff(&big);
      EXPECT_GT(v(big), 0.0);
    }
    EXPECT_GE(u.eigenvalues(0), u.eigenvalues(1));
    EXPECT_LT((u.directions.transpose() * u.directions - Matrix::Identity(2, 2)).norm(), 1e-12);
  }
}

TEST(Utilization, FlagsRankAndDegeneracy) {
  const Matrix cov = Eigen::Vector3d(2, 0, 0).asDiagonal();
  EXPECT_TRUE(utilization_matrix(cov, 2).rank_deficient);
  EXPECT_FALSE(utilization_matrix(cov, 1).rank_deficient);
  const Matrix tie = Eigen::Vector3d(2, 2, 1).asDiagonal();
  EXPECT_TRUE(utilization_matrix(tie, 1).near_degenerate);
  const Matrix clear = Eigen::Vector3d(3, 2, 1).asDiagonal();
  EXPECT_FALSE(utilization_matrix(clear, 2).near_degenerate);
}

TEST(Utilization, RejectsBadH) {
  const Matrix cov = Matrix::Identity(2, 2);
  EXPECT_THROW(utilization_matrix(cov, 3), InputError);
  EXPECT_THROW(utilization_matrix(cov, 0), InputError);
}

TEST(Padding, EmbedsSmallerFrame) {
  UtilizationMatrix u;
  u.directions = Matrix::Identity(2, 2);
  u.eigenvalues = Eigen::Vector2d(1, 1);
  const auto p = pad_to_dimension(u, 3);
  ASSERT_EQ(p.dim(), 3);
  EXPECT_EQ(p.directions.topRows(2), u.directions);
  EXPECT_EQ(p.directions.row(2), RowVector::Zero(2));
  EXPECT_EQ(pad_to_dimension(u, 2).directions, u.directions);
  EXPECT_THROW(pad_to_dimension(u, 1), InputError);
}

TEST(Padding, PreservesOrthonormality) {
  const Matrix a = outlook::testing::random_matrix(3, 3, 4);
  const auto u = utilization_matrix(Matrix(a * a.transpose()), 2);
  const auto p = pad_to_dimension(u, 7);
  EXPECT_LT((p.directions.transpose() * p.directions - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_EQ(pad_vector(Eigen::Vector2d(1, 2), 4), Eigen::Vector4d(1, 2, 0, 0));
}
