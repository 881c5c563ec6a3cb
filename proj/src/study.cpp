#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/parallel.hpp"
#include "outlook/procrustes.hpp"
#include "outlook/rng.hpp"

namespace outlook {

namespace {

constexpr std::uint64_t kStudyStream = 0x57d7ULL;
constexpr std::uint64_t kRobustStream = 0x20b5ULL;

std::vector<ClassMoments> population_moments(const MixtureSpec& spec) {
  std::vector<ClassMoments> out;
  for (const auto& c : spec.components) out.push_back({c.mean, c.cov, 0});
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return std::nan("");
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Matrix gaussian_matrix(Index rows, Index cols, CounterRng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Matrix axis_rotation(double a, double b, double c) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(a, Eigen::Vector3d::UnitZ()) * AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

}  // namespace

MixtureSpec default_study_spec() {
  MixtureSpec spec;
  spec.dim = 3;
  const Matrix basis = axis_rotation(0.3, -0.2, 0.25);
  spec.components.push_back({0.5, Eigen::Vector3d(0.3, 0.0, 0.1), Eigen::Vector3d(1.0, 0.3, 0.05).asDiagonal()});
  Matrix cov = basis * Eigen::Vector3d(0.8, 0.25, 0.04).asDiagonal() * basis.transpose();
  spec.components.push_back({0.5, Eigen::Vector3d(-0.3, 0.2, 0.0), 0.5 * (cov + cov.transpose())});
  return scale_spec_to_unit_second_moment(spec);
}

GroundTruthTransform default_study_transform() {
  GroundTruthTransform t;
  t.rotation = axis_rotation(-0.4, 0.3, -0.3);
  t.translations = {Eigen::Vector3d(0.25, -0.1, 0.4), Eigen::Vector3d(-0.2, 0.3, 0.1)};
  return t;
}

std::vector<double> ComplexityCurve::median_max_errors() const {
  std::vector<double> out;
  for (const auto& per_size : rotation_errors) {
    std::vector<double> maxima;
    for (const auto& per_seed : per_size) maxima.push_back(*std::max_element(per_seed.begin(), per_seed.end()));
    out.push_back(median(std::move(maxima)));
  }
  return out;
}

double ComplexityCurve::loglog_slope() const {
  const auto med = median_max_errors();
  const std::size_t n = med.size();
  if (n < 2) throw InputError("loglog_slope: need at least two sample sizes");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(static_cast<double>(sample_sizes[i]));
    my += std::log(med[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(static_cast<double>(sample_sizes[i])) - mx;
    sxy += dx * (std::log(med[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

ComplexityCurve sample_complexity_study(const MixtureSpec& spec, const GroundTruthTransform& transform,
                                        std::span<const int> sizes, int seeds_per_size, Index h, std::uint64_t seed,
                                        unsigned threads) {
  spec.validate();
  if (sizes.empty()) throw InputError("sample_complexity_study: no sample sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2) throw InputError("sample_complexity_study: sizes must be at least 2");
    if (i > 0 && sizes[i] <= sizes[i - 1]) throw InputError("sample_complexity_study: sizes must be strictly increasing");
  }
  if (seeds_per_size < 1) throw InputError("sample_complexity_study: need at least one seed per size");
  const MixtureSpec source_spec = transform_spec(spec, transform);
  const auto target_pop = population_moments(spec);
  const auto source_pop = population_moments(source_spec);

  const auto population = fit_from_moments(target_pop, source_pop, h);
  for (const auto& c : population.classes) {
    if (c.near_degenerate) {
      throw InputError("sample_complexity_study: degenerate spectrum for class " + std::to_string(c.class_index) +
                       "; population eigenvectors are not unique");
    }
  }

  const int classes = spec.num_classes();
  ComplexityCurve curve;
  curve.sample_sizes.assign(sizes.begin(), sizes.end());
  curve.rotation_errors.assign(sizes.size(), std::vector<std::vector<double>>(static_cast<std::size_t>(seeds_per_size)));

  const std::size_t tasks = sizes.size() * static_cast<std::size_t>(seeds_per_size);
  parallel_for(tasks, threads, [&](std::size_t task) {
    const std::size_t si = task / static_cast<std::size_t>(seeds_per_size);
    const std::size_t rep = task % static_cast<std::size_t>(seeds_per_size);
    const std::vector<int> counts(static_cast<std::size_t>(classes), sizes[si]);
    const auto key = [&](std::uint64_t side) {
      return stream_key({seed, kStudyStream, static_cast<std::uint64_t>(sizes[si]), rep, side});
    };
    const auto target = sample_mixture(spec, counts, key(0), "target");
    const auto source = sample_mixture(source_spec, counts, key(1), "source");
    FitOptions fit;
    fit.scale = false;
    const auto estimate = fit_two_outlooks(target, source, h, fit);
    auto& errors = curve.rotation_errors[si][rep];
    for (std::size_t i = 0; i < estimate.classes.size(); ++i) {
      errors.push_back((estimate.classes[i].rotation - population.classes[i].rotation).norm());
    }
  });
  return curve;
}

void write_curve_csv(std::ostream& out, const ComplexityCurve& curve) {
  std::string buf = "size,seed,class,value\n";
  char num[64];
  for (std::size_t s = 0; s < curve.sample_sizes.size(); ++s) {
    for (std::size_t r = 0; r < curve.rotation_errors[s].size(); ++r) {
      const auto& errs = curve.rotation_errors[s][r];
      for (std::size_t i = 0; i < errs.size(); ++i) {
        const auto res = std::to_chars(num, num + sizeof(num), errs[i]);
        buf += std::to_string(curve.sample_sizes[s]) + "," + std::to_string(r) + "," + std::to_string(i + 1) + "," +
               std::string(num, res.ptr) + "\n";
      }
    }
  }
  out << buf;
}

void to_json(nlohmann::json& j, const ComplexityCurve& curve) {
  j = {{"sample_sizes", curve.sample_sizes},
       {"rotation_errors", curve.rotation_errors},
       {"median_max_errors", curve.median_max_errors()},
       {"loglog_slope", curve.sample_sizes.size() >= 2 ? nlohmann::json(curve.loglog_slope()) : nlohmann::json(nullptr)}};
}

RobustCheckResult robust_additivity_check(const RobustCheckConfig& config) {
  if (config.instances < 1 || config.samples < 1) throw InputError("robust check: instances and samples must be positive");
  if (config.dim < 1 || config.columns < 1) throw InputError("robust check: shape must be positive");
  for (double rho : config.rho_values) {
    if (!(rho >= 0.0)) throw InputError("robust check: rho must be non-negative");
  }
  const std::size_t per_instance = config.rho_values.size();
  std::vector<double> excess(static_cast<std::size_t>(config.instances) * per_instance, 0.0);
  std::vector<double> gap(excess.size(), 0.0);

  parallel_for(static_cast<std::size_t>(config.instances), config.threads, [&](std::size_t inst) {
    CounterRng rng{config.seed, kRobustStream, inst};
    const Matrix d1 = gaussian_matrix(config.dim, config.columns, rng);
    const Matrix d2 = gaussian_matrix(config.dim, config.columns, rng);
    const auto sol = match_by_rotation(d1, d2);
    const double entries = static_cast<double>(config.dim * config.columns);
    for (std::size_t r = 0; r < per_instance; ++r) {
      const RobustBudget budget{config.rho_values[r], 0.0};
      const double bound = robust_value(sol, budget);
      double worst = 0.0;
      for (int s = 0; s < config.samples; ++s) {
        Matrix delta = gaussian_matrix(config.dim, config.columns, rng);
        const double norm = delta.norm();
        if (norm == 0.0) continue;
        // Odd draws sit on the sphere, where the maximum lives; even draws
        // fill the ball uniformly.
        const double radius = (s % 2 == 1) ? budget.rho_star : budget.rho_star * std::pow(rng.uniform(), 1.0 / entries);
        delta *= radius / norm;
        worst = std::max(worst, (sol.rotation * (d2 + delta) - d1).norm());
      }
      const Matrix star = worst_case_perturbation(sol, d1, d2, budget);
      const double achieved = (sol.rotation * (d2 + star) - d1).norm();
      excess[inst * per_instance + r] = worst - bound;
      gap[inst * per_instance + r] = std::abs(achieved - bound);
    }
  });

  RobustCheckResult result;
  result.max_sampled_excess = *std::max_element(excess.begin(), excess.end());
  result.max_analytic_gap = *std::max_element(gap.begin(), gap.end());
  result.evaluated = static_cast<int>(excess.size());
  return result;
}

}  // namespace outlook
