#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "outlook/data_model.hpp"
#include "outlook/moments.hpp"
#include "outlook/preprocess.hpp"
#include "outlook/types.hpp"

namespace outlook {

/// Instances known to coincide across the two outlooks, in raw feature
/// coordinates. Row r of `target_rows` and of `source_rows` describe the
/// same instance, of class labels[r].
struct Correspondences {
  Matrix target_rows;
  Matrix source_rows;
  std::vector<int> labels;
  double weight = 1.0;
};

struct FitOptions {
  /// Winsorize and min-max scale each outlook before estimating moments.
  bool scale = true;
  double winsor_fraction = kDefaultWinsorFraction;
  /// Pre-fit scalers (e.g. fit on unlabeled rows); used instead of fitting
  /// on the rows passed to the fit.
  std::optional<ScalerParams> target_scaler;
  std::optional<ScalerParams> source_scaler;
  /// Lower bound for the common padded dimension; 0 means
  /// max(source_dim, target_dim).
  Index padded_dim = 0;
  /// Experiment-wide class count; 0 means the max label seen.
  int num_classes = 0;
  std::optional<Correspondences> correspondences;
  /// fit_multi_outlook only: pre-fit scalers keyed by outlook id.
  std::map<std::string, ScalerParams> outlook_scalers;
};

struct ClassMapping {
  int class_index = 0;
  /// padded_dim x padded_dim orthogonal matrix.
  Matrix rotation;
  /// Class means in the scaled, zero-padded coordinates of each outlook.
  Vector source_mean;
  Vector target_mean;
  /// Procrustes misfit ||R D_src - D_tgt||_F of the utilization matrices.
  double objective = 0.0;
  bool near_degenerate = false;
  bool rank_deficient = false;
};

/// Class-conditional affine map from a source outlook into a target outlook:
/// x -> (pad(scale(x)) - mu_src) R^T + mu_tgt.
struct OutlookMapping {
  std::string source_id;
  std::string target_id;
  Index h = 0;
  Index source_dim = 0;
  Index target_dim = 0;
  Index padded_dim = 0;
  std::vector<ClassMapping> classes;
  std::optional<ScalerParams> source_scaler;
  std::optional<ScalerParams> target_scaler;

  const ClassMapping& for_class(int class_index) const;
  /// Throws InputError when a structural or orthogonality invariant fails.
  void validate() const;
};

/// Padded utilization matrices collected during a fit, per class.
struct FitFrames {
  std::vector<Matrix> target;
  std::vector<Matrix> source;
};

/// Matches `source` onto `target`: per class, center both clouds, take the
/// top-h covariance eigenvectors, zero-pad to a common dimension, and solve
/// the orthogonal Procrustes problem between them.
OutlookMapping fit_two_outlooks(const Outlook& target, const Outlook& source, Index h,
                                const FitOptions& options = {}, FitFrames* frames = nullptr);

/// Same as fit_two_outlooks but from already-estimated (e.g. population)
/// class moments; no scaling is involved.
OutlookMapping fit_from_moments(std::span<const ClassMoments> target, std::span<const ClassMoments> source,
                                Index h, Index padded_dim = 0, FitFrames* frames = nullptr);

/// Maps labeled source rows; the result has padded_dim columns.
Matrix apply_mapping(const OutlookMapping& m, const Matrix& source_rows, std::span<const int> labels);

/// Applies only the rotation and translation stage to rows already in the
/// source's scaled, padded coordinates.
Matrix apply_rigid_stage(const OutlookMapping& m, const Matrix& scaled_rows, std::span<const int> labels);

/// Drops the zero-padded coordinates beyond target_dim.
Matrix to_target_space(const OutlookMapping& m, const Matrix& mapped);

/// Mappings of m - 1 outlooks into one final outlook, all sharing one padded
/// dimension so they can be composed and switched.
struct MultiOutlookModel {
  std::string final_id;
  Index h = 0;
  Index padded_dim = 0;
  std::vector<std::string> outlook_ids;
  std::map<std::string, Index> dims;
  std::map<std::string, std::optional<ScalerParams>> scalers;
  /// Per outlook, per class mean in that outlook's scaled, padded space.
  std::map<std::string, std::vector<Vector>> class_means;
  std::vector<OutlookMapping> mappings;
  /// Sum over classes and outlook pairs of ||R_k D_k - R_j D_j||_F^2 at fit time.
  double alignment_objective = 0.0;

  const OutlookMapping& mapping_for(const std::string& outlook_id) const;
  bool contains(const std::string& outlook_id) const;
  int num_classes() const;
  void validate() const;
};

MultiOutlookModel fit_multi_outlook(std::span<const Outlook> outlooks, const std::string& final_id, Index h,
                                    const FitOptions& options = {});

/// sum_i sum_{k<j} ||R_i^(k) D_i^(k) - R_i^(j) D_i^(j)||_F^2, with
/// rotations[j][i] and frames[j][i] for outlook j and class i.
double multi_outlook_objective(const std::vector<std::vector<Matrix>>& rotations,
                               const std::vector<std::vector<Matrix>>& frames);

/// Re-expresses rows that live in the current final outlook's scaled, padded
/// space in the space of outlook `new_final_id`:
/// x -> (x - mu_final) R_k + mu_k.
Matrix switch_final_outlook(const MultiOutlookModel& model, const Matrix& rows_in_final, std::span<const int> labels,
                            const std::string& new_final_id);

/// The same model with `new_final_id` as final outlook. Rotation of outlook j
/// becomes R_k^T R_j, and the old final outlook maps with R_k^T.
MultiOutlookModel rebase_model(const MultiOutlookModel& model, const std::string& new_final_id);

using MappingModel = std::variant<OutlookMapping, MultiOutlookModel>;

void to_json(nlohmann::json& j, const OutlookMapping& m);
void from_json(const nlohmann::json& j, OutlookMapping& m);
void to_json(nlohmann::json& j, const MultiOutlookModel& m);
void from_json(const nlohmann::json& j, MultiOutlookModel& m);

void save_mapping(const MappingModel& model, const std::filesystem::path& path);
MappingModel load_mapping(const std::filesystem::path& path);
MappingModel parse_mapping(const std::string& text);

}  // namespace outlook
