#include "outlook/procrustes.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace outlook {

namespace {

constexpr double kNullTolerance = 1e-10;

void check_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                     ")");
  }
}

}  // namespace

RotationSolution match_by_rotation(const Matrix& d1, const Matrix& d2) {
  check_same_shape(d1, d2, "match_by_rotation");
  if (!d1.allFinite() || !d2.allFinite()) throw InputError("match_by_rotation: non-finite input");
  const Index d = d1.rows();

  const Matrix cross = d2 * d1.transpose();
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  const Vector& sigma = svd.singularValues();

  Index rank = 0;
  const double cutoff = kNullTolerance * std::max(sigma.size() > 0 ? sigma(0) : 0.0, 1e-300);
  while (rank < sigma.size() && sigma(rank) > cutoff) ++rank;

  RotationSolution sol;
  sol.rotation = v.leftCols(rank) * u.leftCols(rank).transpose();
  if (rank < d) {
    // On the null space the objective is flat; take the polar factor of
    // V0^T U0, which maximizes tr(R) there.
    const auto u0 = u.rightCols(d - rank);
    const auto v0 = v.rightCols(d - rank);
    Eigen::JacobiSVD<Matrix> polar(v0.transpose() * u0, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix w = polar.matrixU() * polar.matrixV().transpose();
    sol.rotation += v0 * w * u0.transpose();
  }
  sol.singular_values = sigma;
  sol.objective = (sol.rotation * d2 - d1).norm();
  return sol;
}

double rotation_objective(const Matrix& rotation, const Matrix& d1, const Matrix& d2) {
  check_same_shape(d1, d2, "rotation_objective");
  if (rotation.rows() != d1.rows() || rotation.cols() != d1.rows()) {
    throw InputError("rotation_objective: rotation must be " + std::to_string(d1.rows()) + "x" +
                     std::to_string(d1.rows()));
  }
  return (rotation * d2 - d1).squaredNorm();
}

Matrix augment_with_correspondences(const Matrix& directions, const Matrix& pairs, double weight) {
  if (pairs.cols() == 0) return directions;
  if (pairs.rows() != directions.rows()) {
    throw InputError("augment_with_correspondences: instances have " + std::to_string(pairs.rows()) +
                     " rows, directions have " + std::to_string(directions.rows()));
  }
  if (!(weight >= 0.0)) throw InputError("augment_with_correspondences: weight must be non-negative");
  Matrix out(directions.rows(), directions.cols() + pairs.cols());
  out << directions, weight * pairs;
  return out;
}

RobustBudget estimate_rho_star(std::span<const double> delta_norm_samples, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw InputError("estimate_rho_star: eta must lie in (0, 1)");
  if (delta_norm_samples.empty()) throw InputError("estimate_rho_star: no samples");
  std::vector<double> sorted(delta_norm_samples.begin(), delta_norm_samples.end());
  for (double s : sorted) {
    if (!(s >= 0.0)) throw InputError("estimate_rho_star: norms must be non-negative");
  }
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - eta) * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return {sorted[rank - 1], 1.0 - eta};
}

double robust_value(const RotationSolution& sol, const RobustBudget& budget) {
  return sol.objective + budget.rho_star;
}

Matrix worst_case_perturbation(const RotationSolution& sol, const Matrix& d1, const Matrix& d2,
                               const RobustBudget& budget) {
  check_same_shape(d1, d2, "worst_case_perturbation");
  const Matrix misfit = sol.rotation * d2 - d1;
  const double norm = misfit.norm();
  if (norm > 0.0) return budget.rho_star * (sol.rotation.transpose() * misfit) / norm;
  Matrix unit = Matrix::Zero(d1.rows(), d1.cols());
  if (unit.size() > 0) unit(0, 0) = 1.0;
  return budget.rho_star * sol.rotation.transpose() * unit;
}

}  // namespace outlook
