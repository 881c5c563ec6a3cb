#pragma once

#include <Eigen/Geometry>

#include "outlook/rng.hpp"
#include "outlook/synth.hpp"
#include "outlook/types.hpp"

namespace outlook::testing {

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  CounterRng rng{seed, 0x7e57ULL};
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Matrix planar_rotation(double theta) {
  Matrix r(2, 2);
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

inline Matrix euler_rotation(double a, double b, double c) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(a, Eigen::Vector3d::UnitZ()) * AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

/// d=3, c=2, axis-aligned covariances with well separated eigenvalues.
inline MixtureSpec separated_spec() {
  MixtureSpec spec;
  spec.dim = 3;
  spec.components.push_back({0.5, Eigen::Vector3d(1.0, 0.0, 0.5), Eigen::Vector3d(4.0, 1.5, 0.3).asDiagonal()});
  spec.components.push_back({0.5, Eigen::Vector3d(-1.0, 0.5, 0.0), Eigen::Vector3d(3.0, 1.0, 0.2).asDiagonal()});
  return spec;
}

/// A rotation whose columns each keep one clearly dominant positive entry, so
/// eigenvector sign conventions on both sides agree.
inline GroundTruthTransform moderate_transform() {
  GroundTruthTransform t;
  t.rotation = euler_rotation(0.4, -0.3, 0.35);
  t.translations = {Eigen::Vector3d(2.0, -1.0, 0.5), Eigen::Vector3d(-0.5, 1.0, 3.0)};
  return t;
}

}  // namespace outlook::testing
