#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "outlook/data_model.hpp"
#include "outlook/preprocess.hpp"
#include "outlook/synth.hpp"
#include "outlook/types.hpp"

namespace outlook {

// ---------------------------------------------------------------------------
// Metric and classifier

struct BerResult {
  /// e_i / n_i per class; NaN for classes absent from the test labels.
  Vector per_class_error_rate;
  /// Mean of the per-class error rates over classes present in the test set.
  double ber = 0.0;
  /// confusion(actual - 1, predicted - 1).
  Eigen::MatrixXi confusion;
  /// Classes with no test samples; they are left out of the average.
  std::vector<int> excluded_classes;
};

BerResult balanced_error_rate(std::span<const int> predicted, std::span<const int> actual, int num_classes);

/// Euclidean k-nearest-neighbour vote. Distance ties go to the lower training
/// index and vote ties to the smallest class label.
std::vector<int> knn_classify(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x, int k,
                              unsigned threads = 1);

// ---------------------------------------------------------------------------
// Experiments

enum class Method { kTrg, kSrc, kAll, kFeda, kMomap, kOpt };

std::string to_string(Method m);
Method parse_method(const std::string& name);

struct ExperimentConfig {
  /// All outlooks of the experiment; ids must be unique.
  std::vector<Outlook> outlooks;
  /// Two-outlook mode: the outlook that is classified.
  std::string target_id;
  /// Two-outlook mode: outlooks mapped into the target (default: all others).
  std::vector<std::string> source_ids;
  Index h = 0;
  /// When non-empty, h is chosen by select_h on one seeded split.
  std::vector<Index> h_candidates;
  double h_selection_fraction = 0.5;
  std::vector<double> label_fractions{0.05};
  int folds = 10;
  std::uint64_t seed = 0;
  int k = 5;
  bool scale = true;
  double winsor_fraction = kDefaultWinsorFraction;
  /// Empty means every method applicable to the feature spaces.
  std::vector<Method> methods;
  unsigned threads = 1;
};

struct ReportCell {
  /// Outlook whose held-out rows were classified.
  std::string component;
  Method method = Method::kTrg;
  double fraction = 0.0;
  int fold = 0;
  BerResult result;
};

struct Aggregate {
  std::string component;
  Method method = Method::kTrg;
  double fraction = 0.0;
  double mean = 0.0;
  double std = 0.0;
  int count = 0;
};

struct ExperimentReport {
  std::vector<Method> methods;
  std::vector<double> label_fractions;
  std::vector<std::string> components;
  int folds = 0;
  Index h = 0;
  /// Ordered by (fraction, fold, component, method).
  std::vector<ReportCell> cells;

  const ReportCell& cell(const std::string& component, Method method, double fraction, int fold) const;
  /// Mean and sample std of BER over folds, per (component, method, fraction).
  std::vector<Aggregate> aggregates() const;
  /// Mean BER over all components and folds of one (method, fraction).
  double mean_ber(Method method, double fraction) const;
};

/// Stratified k-fold over the target; within each training portion a
/// per-class label fraction is drawn as the labeled target set. Every method
/// of a (fraction, fold) cell sees the same split.
ExperimentReport run_transfer_experiment(const ExperimentConfig& config);

/// Every outlook in turn is the component under test: all outlooks' labeled
/// rows are mapped into it with fit_multi_outlook and pooled for training.
ExperimentReport run_multi_source_experiment(const ExperimentConfig& config);

struct SelectHOptions {
  double label_fraction = 0.5;
  int k = 5;
  bool scale = true;
  double winsor_fraction = kDefaultWinsorFraction;
};

/// The candidate with the lowest MOMAP BER on one seeded split of the
/// target; ties go to the smallest h.
Index select_h(const Outlook& target, const Outlook& source, std::span<const Index> candidates, std::uint64_t seed,
               const SelectHOptions& options = {});

void write_report_csv(std::ostream& out, const ExperimentReport& report);
void to_json(nlohmann::json& j, const ExperimentReport& report);

// ---------------------------------------------------------------------------
// Theory checks

struct ComplexityCurve {
  std::vector<int> sample_sizes;
  /// errors[size][seed][class] = ||R_hat_i - R_i||_F.
  std::vector<std::vector<std::vector<double>>> rotation_errors;

  /// Median over seeds of the per-seed max over classes.
  std::vector<double> median_max_errors() const;
  /// Least-squares slope of log(median error) against log(size).
  double loglog_slope() const;
};

/// Samples both outlooks at each size (exact per-class counts, unscaled),
/// fits the rotations, and compares them with the rotations fit on the exact
/// population moments.
ComplexityCurve sample_complexity_study(const MixtureSpec& spec, const GroundTruthTransform& transform,
                                        std::span<const int> sizes, int seeds_per_size, Index h, std::uint64_t seed,
                                        unsigned threads = 1);

/// Well-separated d=3, c=2 problem used when a study config names no spec. Both the
/// spec and the transform keep each principal direction dominated by one axis so
/// the eigenvector sign convention is stable under sampling noise.
MixtureSpec default_study_spec();
GroundTruthTransform default_study_transform();

void write_curve_csv(std::ostream& out, const ComplexityCurve& curve);
void to_json(nlohmann::json& j, const ComplexityCurve& curve);

struct RobustCheckConfig {
  int instances = 50;
  int samples = 100000;
  std::vector<double> rho_values{0.1, 1.0, 10.0};
  Index dim = 3;
  Index columns = 2;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct RobustCheckResult {
  /// max over instances and rho of (sampled max - (nominal + rho)); <= 0 up to rounding.
  double max_sampled_excess = 0.0;
  /// max over instances and rho of |value at the analytic maximizer - (nominal + rho)|.
  double max_analytic_gap = 0.0;
  int evaluated = 0;
};

/// Monte-Carlo and analytic checks that the worst case over the Frobenius
/// ball of radius rho adds exactly rho to the nominal Procrustes misfit.
RobustCheckResult robust_additivity_check(const RobustCheckConfig& config);

}  // namespace outlook
