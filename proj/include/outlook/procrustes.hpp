#pragma once

#include <span>

#include "outlook/types.hpp"

namespace outlook {

struct RotationSolution {
  /// Orthogonal d x d matrix (rotations and reflections both allowed).
  Matrix rotation;
  /// Frobenius misfit ||R D2 - D1||_F, not squared.
  double objective = 0.0;
  /// Singular values of D2 D1^T, descending.
  Vector singular_values;
};

/// Orthogonal Procrustes: the R minimizing ||R D2 - D1||_F over all
/// orthogonal matrices, R = V U^T where D2 D1^T = U S V^T.
///
/// When D2 D1^T is rank deficient the optimum is not unique on the common
/// null space. There R is completed by the orthogonal map closest to the
/// identity, so fits on matching inputs (e.g. an outlook against itself)
/// return exactly the identity and the completion varies smoothly with the
/// data. Ties among nonzero singular values are left to the SVD; only the
/// objective value is guaranteed in that case.
RotationSolution match_by_rotation(const Matrix& d1, const Matrix& d2);

/// ||R D2 - D1||_F^2.
double rotation_objective(const Matrix& rotation, const Matrix& d1, const Matrix& d2);

/// Appends weight-scaled corresponding-instance columns after the direction
/// columns. Both outlooks must append their instances in the same order.
Matrix augment_with_correspondences(const Matrix& directions, const Matrix& pairs, double weight = 1.0);

struct RobustBudget {
  double rho_star = 0.0;
  /// 1 - eta, the probability mass the ball is meant to cover.
  double confidence = 0.0;
};

/// Nearest-rank (1 - eta) quantile of perturbation norms: the
/// ceil((1 - eta) n)-th smallest sample.
RobustBudget estimate_rho_star(std::span<const double> delta_norm_samples, double eta);

/// Worst-case misfit over the uncertainty ball ||Delta||_F <= rho*:
/// nominal objective + rho*.
double robust_value(const RotationSolution& sol, const RobustBudget& budget);

/// The perturbation attaining robust_value: rho* R^T V / ||V||_F with
/// V = R D2 - D1. For a zero misfit any direction is optimal and
/// rho* R^T E with E = e_0 e_0^T is returned.
Matrix worst_case_perturbation(const RotationSolution& sol, const Matrix& d1, const Matrix& d2,
                               const RobustBudget& budget);

}  // namespace outlook
