// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
//
// Run from the build tree:  ./build/tests/acceptance [criterion numbers...]

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "outlook/data_model.hpp"
#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/procrustes.hpp"
#include "outlook/rng.hpp"
#include "outlook/synth.hpp"

namespace fs = std::filesystem;
using namespace outlook;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Matrix gaussian(Index rows, Index cols, CounterRng& rng) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = rng.normal();
  return m;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

Matrix axis_rotation(double a, double b, double c) {
  using Eigen::AngleAxisd;
  return (AngleAxisd(a, Eigen::Vector3d::UnitZ()) * AngleAxisd(b, Eigen::Vector3d::UnitY()) *
          AngleAxisd(c, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

// 1 ------------------------------------------------------------------------

Outcome procrustes_vs_grid() {
  constexpr double kStep = 1e-4;
  const int steps = static_cast<int>(std::ceil(2.0 * std::numbers::pi / kStep));
  std::vector<double> cs(static_cast<std::size_t>(steps)), sn(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    cs[static_cast<std::size_t>(s)] = std::cos(s * kStep);
    sn[static_cast<std::size_t>(s)] = std::sin(s * kStep);
  }
  double worst = 0.0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    CounterRng rng{0xacc1ULL, inst};
    const Matrix d1 = gaussian(2, 2, rng);
    const Matrix d2 = gaussian(2, 2, rng);
    const double closed = match_by_rotation(d1, d2).objective;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < cs.size(); ++s) {
      const double c = cs[s], n = sn[s];
      // R = [[c, -n], [n, c]] and the reflection diag(1, -1) R.
      double rot = 0.0, ref = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double x = c * d2(0, k) - n * d2(1, k);
        const double y = n * d2(0, k) + c * d2(1, k);
        rot += (x - d1(0, k)) * (x - d1(0, k)) + (y - d1(1, k)) * (y - d1(1, k));
        ref += (x - d1(0, k)) * (x - d1(0, k)) + (-y - d1(1, k)) * (-y - d1(1, k));
      }
      best = std::min({best, rot, ref});
    }
    worst = std::max(worst, std::abs(closed - std::sqrt(best)));
  }
  return {worst <= 1e-6, "max |closed - grid| = " + fmt(worst)};
}

// 2 ------------------------------------------------------------------------

Outcome orthonormal_alignment() {
  double worst_obj = 0.0, worst_orth = 0.0;
  for (std::uint64_t inst = 0; inst < 1000; ++inst) {
    CounterRng rng{0xacc2ULL, inst};
    const Index d = 1 + static_cast<Index>(rng.below(10));
    const Index h = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(d)));
    const Matrix a = random_orthogonal(d, stream_key({inst, 1})).leftCols(h);
    const Matrix b = random_orthogonal(d, stream_key({inst, 2})).leftCols(h);
    const auto sol = match_by_rotation(a, b);
    worst_obj = std::max(worst_obj, sol.objective);
    worst_orth = std::max(
        worst_orth, (sol.rotation.transpose() * sol.rotation - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
  }
  return {worst_obj <= 1e-8 && worst_orth <= 1e-10,
          "max objective = " + fmt(worst_obj) + ", max |R^T R - I| = " + fmt(worst_orth)};
}

// 3 ------------------------------------------------------------------------

Outcome robust_additivity() {
  RobustCheckConfig cfg;
  cfg.instances = 50;
  cfg.samples = 100000;
  cfg.rho_values = {0.1, 1.0, 10.0};
  cfg.seed = 0xacc3ULL;
  cfg.threads = worker_threads();
  const auto r = robust_additivity_check(cfg);
  return {r.max_sampled_excess <= 1e-9 && r.max_analytic_gap <= 1e-9,
          "max sampled - bound = " + fmt(r.max_sampled_excess) + ", analytic gap = " + fmt(r.max_analytic_gap) +
              " over " + std::to_string(r.evaluated) + " cases"};
}

// 4 ------------------------------------------------------------------------

MixtureSpec recovery_spec() {
  MixtureSpec spec;
  spec.dim = 3;
  const Matrix basis = axis_rotation(0.2, 0.15, -0.1);
  spec.components.push_back({0.5, Eigen::Vector3d(0.5, -0.2, 0.1), Eigen::Vector3d(2.0, 0.9, 0.3).asDiagonal()});
  const Matrix cov = basis * Eigen::Vector3d(1.5, 0.6, 0.2).asDiagonal() * basis.transpose();
  spec.components.push_back({0.5, Eigen::Vector3d(-0.4, 0.3, 0.6), 0.5 * (cov + cov.transpose())});
  return spec;
}

GroundTruthTransform recovery_transform() {
  return {axis_rotation(0.45, -0.3, 0.35), {Eigen::Vector3d(1.0, -2.0, 0.5), Eigen::Vector3d(-1.5, 0.5, 2.0)}};
}

Outcome exact_recovery() {
  const auto spec = recovery_spec();
  const auto t = recovery_transform();
  const auto source_spec = transform_spec(spec, t);

  // Population level: the fitted map must carry source moments onto target moments.
  std::vector<ClassMoments> tm, sm;
  for (int i = 0; i < 2; ++i) {
    tm.push_back({spec.components[static_cast<std::size_t>(i)].mean, spec.components[static_cast<std::size_t>(i)].cov, 0});
    sm.push_back({source_spec.components[static_cast<std::size_t>(i)].mean,
                  source_spec.components[static_cast<std::size_t>(i)].cov, 0});
  }
  const auto pop = fit_from_moments(tm, sm, 3);
  double pop_err = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& cm = pop.classes[i];
    const Vector mean = cm.rotation * (sm[i].mean - cm.source_mean) + cm.target_mean;
    const Matrix cov = cm.rotation * sm[i].covariance * cm.rotation.transpose();
    pop_err = std::max({pop_err, (mean - tm[i].mean).cwiseAbs().maxCoeff(), (cov - tm[i].covariance).cwiseAbs().maxCoeff()});
  }

  // n = 10^6 per class: map a Q-transformed copy back onto the target rows.
  const std::vector<int> counts{1000000, 1000000};
  const auto target = sample_mixture(spec, counts, 0xacc4ULL, "target");
  auto source = transform_outlook(target, t);
  source.id = "source";
  FitOptions opts;
  opts.scale = false;
  const auto m = fit_two_outlooks(target, source, 3, opts);
  const Matrix mapped = to_target_space(m, apply_mapping(m, source.features, source.labels));
  const double sample_err = (mapped - target.features).cwiseAbs().maxCoeff();
  return {pop_err <= 1e-8 && sample_err <= 1e-3,
          "population max entry error = " + fmt(pop_err) + ", n=1e6 max entry error = " + fmt(sample_err)};
}

// 5 ------------------------------------------------------------------------

Outcome complexity_trend() {
  const std::vector<int> sizes{50, 200, 800, 3200};
  const auto curve =
      sample_complexity_study(default_study_spec(), default_study_transform(), sizes, 20, 2, 0xacc5ULL, worker_threads());
  const auto med = curve.median_max_errors();
  bool decreasing = true;
  for (std::size_t i = 1; i < med.size(); ++i) decreasing = decreasing && med[i] < med[i - 1];
  const double slope = curve.loglog_slope();
  std::string meds;
  for (double v : med) meds += (meds.empty() ? "" : ", ") + fmt(v);
  return {decreasing && slope >= -0.7 && slope <= -0.3, "medians [" + meds + "], slope = " + fmt(slope)};
}

// 6 ------------------------------------------------------------------------

Outcome multi_outlook_consistency() {
  const auto spec = recovery_spec();
  const std::vector<int> counts{400, 400};
  std::vector<Outlook> outlooks;
  outlooks.push_back(sample_mixture(spec, counts, 61, "a"));
  const std::vector<int> b_counts{500, 300}, c_counts{350, 450};
  auto b = transform_outlook(sample_mixture(spec, b_counts, 62, "b"), recovery_transform());
  b.id = "b";
  outlooks.push_back(b);
  auto c = sample_mixture(spec, c_counts, 63, "c");
  c.features = c.features.leftCols(2).eval();
  outlooks.push_back(c);

  const auto model = fit_multi_outlook(outlooks, "a", 2);
  const auto& a = outlooks[0];
  const Matrix a_scaled = apply_scaler(*model.scalers.at("a"), a.features);
  const Matrix in_b = switch_final_outlook(model, a_scaled, a.labels, "b");
  const auto rebased = rebase_model(model, "b");
  const Matrix back = switch_final_outlook(rebased, in_b, a.labels, "a");
  const Matrix a_to_b = apply_rigid_stage(rebased.mapping_for("a"), a_scaled, a.labels);
  const double round_trip =
      std::max((back - a_scaled).cwiseAbs().maxCoeff(), (a_to_b - in_b).cwiseAbs().maxCoeff());

  // c -> a -> (switch) b against the composed rotation applied directly.
  const Matrix c_in_a = apply_mapping(model.mapping_for("c"), c.features, c.labels);
  const Matrix switched = switch_final_outlook(model, c_in_a, c.labels, "b");
  const auto& mc = model.mapping_for("c");
  const auto& mb = model.mapping_for("b");
  const Matrix c_scaled = apply_scaler(*model.scalers.at("c"), c.features);
  double composed_err = 0.0;
  for (Index r = 0; r < c.size(); ++r) {
    const auto k = static_cast<std::size_t>(c.labels[static_cast<std::size_t>(r)] - 1);
    const Vector x = pad_vector(c_scaled.row(r).transpose(), model.padded_dim);
    const Vector direct = mb.classes[k].rotation.transpose() * mc.classes[k].rotation * (x - mc.classes[k].source_mean) +
                          mb.classes[k].source_mean;
    composed_err = std::max(composed_err, (switched.row(r).transpose() - direct).cwiseAbs().maxCoeff());
  }
  return {model.alignment_objective <= 1e-8 && round_trip <= 1e-10 && composed_err <= 1e-9,
          "objective = " + fmt(model.alignment_objective) + ", round trip = " + fmt(round_trip) +
              ", composed vs direct = " + fmt(composed_err)};
}

// 7 ------------------------------------------------------------------------

/// Three overlapping classes in d=8 with rotated, decaying spectra. At 5%
/// labels (90 per class per fold) kNN is still far from its full-data error.
MixtureSpec protocol_spec() {
  constexpr Index d = 8;
  MixtureSpec spec;
  spec.dim = d;
  for (int k = 0; k < 3; ++k) {
    Vector mean = Vector::Zero(d);
    Vector var(d);
    for (Index j = 0; j < d; ++j) var(j) = 1.0 / (1.0 + static_cast<double>(j) * (1.0 + 0.3 * k));
    mean(k) = 0.6;
    if (k == 2) mean(0) = -0.3;
    const Matrix basis = random_orthogonal(d, 100 + static_cast<std::uint64_t>(k));
    const Matrix cov = basis * var.asDiagonal() * basis.transpose();
    spec.components.push_back({1.0 / 3.0, mean, 0.5 * (cov + cov.transpose())});
  }
  return spec;
}

Outcome protocol_analog() {
  const auto spec = protocol_spec();
  GroundTruthTransform t;
  t.rotation = random_orthogonal(spec.dim, 7);
  for (int k = 0; k < 3; ++k) t.translations.push_back(Vector::Constant(spec.dim, 0.5 * k - 0.3));
  int wins = 0;
  double improvement = 0.0;
  bool trg_equals_opt = true;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    const std::vector<int> tc(3, 2000), sc(3, 4000);
    auto target = sample_mixture(spec, tc, stream_key({0xacc7ULL, rep, 1}), "target");
    auto source = transform_outlook(sample_mixture(spec, sc, stream_key({0xacc7ULL, rep, 2}), "source"), t);
    source.id = "source";
    ExperimentConfig cfg;
    cfg.outlooks = {target, source};
    cfg.target_id = "target";
    cfg.h = 8;
    cfg.folds = 10;
    cfg.label_fractions = {0.05, 1.0};
    cfg.methods = {Method::kTrg, Method::kMomap, Method::kOpt};
    cfg.seed = rep;
    cfg.scale = false;
    cfg.threads = worker_threads();
    const auto report = run_transfer_experiment(cfg);
    const double trg = report.mean_ber(Method::kTrg, 0.05);
    const double momap = report.mean_ber(Method::kMomap, 0.05);
    wins += momap < trg;
    improvement += (trg - momap) / 20.0;
    for (int fold = 0; fold < cfg.folds; ++fold) {
      const auto& a = report.cell("target", Method::kTrg, 1.0, fold).result;
      const auto& b = report.cell("target", Method::kOpt, 1.0, fold).result;
      trg_equals_opt = trg_equals_opt && a.ber == b.ber && a.confusion == b.confusion;
    }
  }
  return {wins >= 16 && improvement >= 0.02 && trg_equals_opt,
          "MOMAP < TRG in " + std::to_string(wins) + "/20, mean improvement = " + fmt(improvement) +
              ", TRG == OPT at 1.0: " + (trg_equals_opt ? "yes" : "no")};
}

// 8 ------------------------------------------------------------------------

Outcome metric_correctness() {
  std::vector<int> actual(10, 1);
  actual.insert(actual.end(), 20, 2);
  std::vector<int> predicted = actual;
  predicted[3] = 2;
  predicted[12] = 1;
  predicted[25] = 1;
  const auto r = balanced_error_rate(predicted, actual, 2);
  bool rows_ok = r.confusion.row(0).sum() == 10 && r.confusion.row(1).sum() == 20;

  // Row sums must equal per-class test counts on every cell of a real run.
  const auto spec = protocol_spec();
  const std::vector<int> counts{50, 70, 40};
  const auto target = sample_mixture(spec, counts, 81, "target");
  auto source = sample_mixture(spec, counts, 82, "source");
  ExperimentConfig cfg;
  cfg.outlooks = {target, source};
  cfg.target_id = "target";
  cfg.h = 2;
  cfg.folds = 5;
  cfg.label_fractions = {0.1, 0.5, 1.0};
  cfg.seed = 8;
  const auto report = run_transfer_experiment(cfg);
  const auto folds = stratified_kfold(target, cfg.folds, stream_key({cfg.seed, 0xf01d5ULL}));
  for (const auto& cell : report.cells) {
    const auto& test = folds[static_cast<std::size_t>(cell.fold)].test_rows;
    for (int c = 1; c <= 3; ++c) {
      const auto expected = std::count_if(test.begin(), test.end(),
                                          [&](Index row) { return target.labels[static_cast<std::size_t>(row)] == c; });
      rows_ok = rows_ok && cell.result.confusion.row(c - 1).sum() == expected;
    }
  }
  return {r.ber == 0.1 && rows_ok, "BER = " + fmt(r.ber) + ", confusion row sums " + (rows_ok ? "match" : "differ")};
}

// 9 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(OUTLOOK_MAP_CLI) + " " + args + " >>" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "outlook_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto log = dir / "log.txt";
  std::ofstream(dir / "spec.json") << nlohmann::json(protocol_spec()).dump();
  if (run_cli("gen --spec " + (dir / "spec.json").string() + " --counts 150,150,150 --seed 9 --transform random --out " +
                  (dir / "t.csv").string(),
              log) != 0) {
    return {false, "gen failed: " + slurp(log)};
  }
  std::ofstream(dir / "eval.json") << nlohmann::json{{"mode", "two-outlook"},
                                                     {"h", 2},
                                                     {"folds", 5},
                                                     {"label_fractions", {0.05, 0.2, 1.0}},
                                                     {"seed", 17},
                                                     {"target", "t"},
                                                     {"outlooks",
                                                      {{{"id", "t"}, {"path", "t.csv"}},
                                                       {{"id", "s"}, {"path", "t_transformed.csv"}}}}}
                                          .dump();
  std::ofstream(dir / "study.json") << nlohmann::json{{"seed", 23},
                                                      {"seeds_per_size", 10},
                                                      {"robust", {{"instances", 6}, {"samples", 3000}}}}
                                           .dump();
  const std::vector<std::pair<std::string, int>> runs{{"a", 1}, {"b", 1}, {"c", 8}};
  for (const auto& [tag, threads] : runs) {
    const std::string th = " --threads " + std::to_string(threads);
    if (run_cli("eval --config " + (dir / "eval.json").string() + " --out " + (dir / ("eval_" + tag)).string() + th,
                log) != 0 ||
        run_cli("study --config " + (dir / "study.json").string() + " --out " + (dir / ("study_" + tag)).string() + th,
                log) != 0) {
      return {false, "cli run failed: " + slurp(log)};
    }
  }
  const std::vector<std::string> files{"eval_{}.csv", "eval_{}.json", "study_{}_curve.csv", "study_{}_curve.json",
                                       "study_{}_summary.json"};
  int compared = 0;
  for (const auto& pattern : files) {
    auto name = [&](const std::string& tag) {
      std::string s = pattern;
      s.replace(s.find("{}"), 2, tag);
      return dir / s;
    };
    const auto ref = slurp(name("a"));
    if (ref.empty()) return {false, "empty output " + name("a").string()};
    for (const char* tag : {"b", "c"}) {
      if (slurp(name(tag)) != ref) return {false, name(tag).filename().string() + " differs from run a"};
      ++compared;
    }
  }
  fs::remove_all(dir);
  return {true, std::to_string(compared) + " file pairs byte-identical (two runs, threads 1 vs 8)"};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double time_limit_s;
  };
  const double none = std::numeric_limits<double>::infinity();
  const std::vector<Criterion> criteria{
      {"Procrustes optimality vs brute force", procrustes_vs_grid, 10},
      {"Zero-error rotation between orthonormal sets", orthonormal_alignment, 5},
      {"Robust additivity (sampled bound and analytic attainment)", robust_additivity, 60},
      {"Exact recovery from a transformed copy", exact_recovery, 120},
      {"Sample-complexity trend", complexity_trend, 120},
      {"Multi-outlook consistency", multi_outlook_consistency, none},
      {"Protocol analog: MOMAP vs TRG at 5% labels", protocol_analog, 300},
      {"Metric correctness", metric_correctness, none},
      {"Determinism of eval and study", determinism, none},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.contains(number)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > criteria[i].time_limit_s) {
      outcome.pass = false;
      outcome.detail += "; over the " + fmt(criteria[i].time_limit_s) + " s limit";
    }
    std::cout << "criterion " << number << ": " << (outcome.pass ? "PASS" : "FAIL") << "  " << criteria[i].name
              << "  (" << outcome.detail << "; " << fmt(secs) << " s)" << std::endl;
    failed += outcome.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
