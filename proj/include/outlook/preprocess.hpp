#pragma once

#include <nlohmann/json_fwd.hpp>

#include "outlook/types.hpp"

namespace outlook {

/// Per-feature winsorization bounds followed by min-max scaling to [0, 1].
struct ScalerParams {
  Vector lower_clip;
  Vector upper_clip;
  Vector min_val;
  Vector range;

  Index dim() const { return lower_clip.size(); }
};

inline constexpr double kDefaultWinsorFraction = 0.02;

/// Clip bounds are the k-th smallest and k-th largest value of each column,
/// k = max(1, ceil(winsor_fraction * n)) (nearest-rank quantiles). Min and
/// range are taken over the clipped column.
ScalerParams fit_scaler(const Matrix& features, double winsor_fraction = kDefaultWinsorFraction);

/// Clips each entry to its feature's bounds, then maps (x - min) / range.
/// Features with zero range map to 0.
Matrix apply_scaler(const ScalerParams& p, const Matrix& features);

void to_json(nlohmann::json& j, const ScalerParams& p);
void from_json(const nlohmann::json& j, ScalerParams& p);

}  // namespace outlook
