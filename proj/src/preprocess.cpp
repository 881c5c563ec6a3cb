#include "outlook/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace outlook {

ScalerParams fit_scaler(const Matrix& features, double winsor_fraction) {
  if (features.rows() == 0) throw InputError("fit_scaler: empty feature matrix");
  if (!(winsor_fraction >= 0.0 && winsor_fraction < 0.5)) {
    throw InputError("fit_scaler: winsor fraction must lie in [0, 0.5)");
  }
  const Index n = features.rows();
  const Index d = features.cols();
  const auto k = static_cast<Index>(
      std::max(1.0, std::ceil(winsor_fraction * static_cast<double>(n) - 1e-9)));
  const Index lo = std::min(k - 1, n - 1);
  const Index hi = std::max(n - k, lo);

  ScalerParams p;
  p.lower_clip.resize(d);
  p.upper_clip.resize(d);
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Index j = 0; j < d; ++j) {
    for (Index i = 0; i < n; ++i) column[static_cast<std::size_t>(i)] = features(i, j);
    std::sort(column.begin(), column.end());
    p.lower_clip(j) = column[static_cast<std::size_t>(lo)];
    p.upper_clip(j) = column[static_cast<std::size_t>(hi)];
  }
  // The clip bounds are attained data values, so they are the post-clip extremes.
  p.min_val = p.lower_clip;
  p.range = p.upper_clip - p.lower_clip;
  return p;
}

Matrix apply_scaler(const ScalerParams& p, const Matrix& features) {
  if (features.cols() != p.dim()) {
    throw InputError("apply_scaler: matrix has " + std::to_string(features.cols()) + " features, scaler expects " +
                     std::to_string(p.dim()));
  }
  Matrix out(features.rows(), features.cols());
  for (Index j = 0; j < features.cols(); ++j) {
    const double range = p.range(j);
    for (Index i = 0; i < features.rows(); ++i) {
      if (range <= 0.0) {
        out(i, j) = 0.0;
        continue;
      }
      const double x = std::clamp(features(i, j), p.lower_clip(j), p.upper_clip(j));
      out(i, j) = std::clamp((x - p.min_val(j)) / range, 0.0, 1.0);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const ScalerParams& p) {
  j = {{"lower_clip", detail::vector_json(p.lower_clip)},
       {"upper_clip", detail::vector_json(p.upper_clip)},
       {"min_val", detail::vector_json(p.min_val)},
       {"range", detail::vector_json(p.range)}};
}

void from_json(const nlohmann::json& j, ScalerParams& p) {
  try {
    p.lower_clip = detail::json_vector(j.at("lower_clip"), "scaler lower_clip");
    p.upper_clip = detail::json_vector(j.at("upper_clip"), "scaler upper_clip");
    p.min_val = detail::json_vector(j.at("min_val"), "scaler min_val");
    p.range = detail::json_vector(j.at("range"), "scaler range");
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scaler: ") + e.what());
  }
  const Index d = p.lower_clip.size();
  if (p.upper_clip.size() != d || p.min_val.size() != d || p.range.size() != d) {
    throw InputError("scaler: field lengths differ");
  }
  for (Index i = 0; i < d; ++i) {
    if (!(p.lower_clip(i) <= p.upper_clip(i)) || !(p.range(i) >= 0.0)) {
      throw InputError("scaler: invariant violated for feature " + std::to_string(i));
    }
  }
}

}  // namespace outlook
