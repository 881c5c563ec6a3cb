#include "outlook/moments.hpp"

#include <cmath>
#include <string>

namespace outlook {

namespace {

constexpr double kGapTolerance = 1e-8;
constexpr double kRankTolerance = 1e-12;

}  // namespace

Vector column_mean(const Matrix& rows) {
  if (rows.rows() < 1) throw InputError("column_mean: no rows");
  return rows.colwise().mean().transpose();
}

ClassMoments class_moments(const Matrix& rows) {
  if (rows.rows() < 2) {
    throw InputError("class_moments: covariance needs at least 2 rows, got " + std::to_string(rows.rows()));
  }
  ClassMoments m;
  m.count = rows.rows();
  m.mean = column_mean(rows);
  const Matrix centered = rows.rowwise() - m.mean.transpose();
  m.covariance = (centered.transpose() * centered) / static_cast<double>(m.count);
  m.covariance = (0.5 * (m.covariance + m.covariance.transpose())).eval();
  return m;
}

UtilizationMatrix utilization_matrix(const Matrix& covariance, Index h) {
  const Index d = covariance.rows();
  if (covariance.cols() != d) throw InputError("utilization_matrix: covariance must be square");
  if (h < 1 || h > d) {
    throw InputError("utilization_matrix: h = " + std::to_string(h) + " outside [1, " + std::to_string(d) + "]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) throw NumericalError("utilization_matrix: eigendecomposition failed");

  // Eigen returns ascending eigenvalues.
  const Vector& values = eig.eigenvalues();
  const Matrix& vectors = eig.eigenvectors();
  UtilizationMatrix u;
  u.directions.resize(d, h);
  u.eigenvalues.resize(h);
  for (Index l = 0; l < h; ++l) {
    const Index src = d - 1 - l;
    Vector v = vectors.col(src);
    Index pivot = 0;
    for (Index k = 1; k < d; ++k) {
      if (std::abs(v(k)) > std::abs(v(pivot))) pivot = k;
    }
    if (v(pivot) < 0) v = -v;
    u.directions.col(l) = v;
    u.eigenvalues(l) = values(src);
  }

  const double lambda_max = std::max(values(d - 1), 0.0);
  u.rank_deficient = lambda_max <= 0.0 || u.eigenvalues(h - 1) <= kRankTolerance * lambda_max;
  const Index checked = std::min(h + 1, d);
  for (Index l = 0; l + 1 < checked; ++l) {
    if (values(d - 1 - l) - values(d - 2 - l) < kGapTolerance * lambda_max) u.near_degenerate = true;
  }
  if (lambda_max <= 0.0 && d > 1) u.near_degenerate = true;
  return u;
}

UtilizationMatrix pad_to_dimension(const UtilizationMatrix& u, Index d_target) {
  if (d_target < u.dim()) {
    throw InputError("pad_to_dimension: target dimension " + std::to_string(d_target) + " is below " +
                     std::to_string(u.dim()));
  }
  UtilizationMatrix out = u;
  out.directions = Matrix::Zero(d_target, u.h());
  out.directions.topRows(u.dim()) = u.directions;
  return out;
}

Vector pad_vector(const Vector& v, Index d_target) {
  if (d_target < v.size()) throw InputError("pad_vector: target dimension is below vector length");
  Vector out = Vector::Zero(d_target);
  out.head(v.size()) = v;
  return out;
}

}  // namespace outlook
