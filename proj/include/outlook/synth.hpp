#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "outlook/data_model.hpp"
#include "outlook/types.hpp"

namespace outlook {

/// One Gaussian component of a class-conditional mixture; component i
/// generates class i + 1.
struct MixtureComponent {
  double weight = 0.0;
  Vector mean;
  Matrix cov;
};

struct MixtureSpec {
  Index dim = 0;
  std::vector<MixtureComponent> components;

  int num_classes() const { return static_cast<int>(components.size()); }
  /// Positive weights summing to 1, conforming shapes, symmetric PSD covariances.
  void validate() const;
};

/// x -> x Q^T + t_i for a sample of class i.
struct GroundTruthTransform {
  Matrix rotation;
  std::vector<Vector> translations;
};

/// Draws exactly n_per_class[i] samples from component i. Sample r of class i
/// depends only on (seed, i, r).
Outlook sample_mixture(const MixtureSpec& spec, std::span<const int> n_per_class, std::uint64_t seed,
                       std::string id = {});

Outlook transform_outlook(const Outlook& o, const GroundTruthTransform& t);
GroundTruthTransform inverse_transform(const GroundTruthTransform& t);

/// The population-level image of a mixture under `t`: means Q mu + t_i,
/// covariances Q Sigma Q^T.
MixtureSpec transform_spec(const MixtureSpec& spec, const GroundTruthTransform& t);

/// Rescales every mean by s and covariance by s^2, with one s for the whole
/// mixture, so that the largest component second moment mu mu^T + Sigma has
/// spectral norm exactly 1. An all-zero mixture is returned unchanged.
MixtureSpec scale_spec_to_unit_second_moment(const MixtureSpec& spec);

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with the sign
/// of R's diagonal folded into Q).
Matrix random_orthogonal(Index dim, std::uint64_t seed);

GroundTruthTransform identity_transform(Index dim, int num_classes);

void to_json(nlohmann::json& j, const MixtureSpec& spec);
void from_json(const nlohmann::json& j, MixtureSpec& spec);
void to_json(nlohmann::json& j, const GroundTruthTransform& t);
void from_json(const nlohmann::json& j, GroundTruthTransform& t);

}  // namespace outlook
