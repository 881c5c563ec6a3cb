#pragma once

#include "outlook/types.hpp"

namespace outlook {

struct ClassMoments {
  Vector mean;
  /// Biased (1/n) sample covariance.
  Matrix covariance;
  Index count = 0;
};

/// Column means; requires at least one row.
Vector column_mean(const Matrix& rows);

/// Mean and 1/n covariance of the rows; requires at least two rows.
ClassMoments class_moments(const Matrix& rows);

/// Top-h eigenvectors of a class covariance, as columns.
///
/// Columns are ordered by non-increasing eigenvalue. Each column is signed so
/// that its entry of largest magnitude is positive (the lowest index wins a
/// magnitude tie). Procrustes between two orthonormal frames always reaches
/// zero misfit, so the mapped data depends on these signs.
struct UtilizationMatrix {
  Matrix directions;
  Vector eigenvalues;
  /// Some retained eigenvalue is numerically zero (h exceeds the rank).
  bool rank_deficient = false;
  /// Two eigenvalues among the top h + 1 are closer than 1e-8 * lambda_max,
  /// so the retained directions are not uniquely determined.
  bool near_degenerate = false;

  Index dim() const { return directions.rows(); }
  Index h() const { return directions.cols(); }
};

UtilizationMatrix utilization_matrix(const Matrix& covariance, Index h);
inline UtilizationMatrix utilization_matrix(const ClassMoments& m, Index h) {
  return utilization_matrix(m.covariance, h);
}

/// Appends zero rows so the directions live in a d_target-dimensional space.
UtilizationMatrix pad_to_dimension(const UtilizationMatrix& u, Index d_target);

/// Zero-pads a vector to length d_target.
Vector pad_vector(const Vector& v, Index d_target);

}  // namespace outlook
