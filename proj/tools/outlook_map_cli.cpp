// outlook-map: command line front end for outlook mapping.
//
//   outlook-map gen   --spec mix.json --counts 100,100 --seed 1 --out a.csv [--transform random]
//   outlook-map fit   --config fit.json --out model.json
//   outlook-map map   --model model.json --input b.csv --out mapped.csv [--outlook id]
//   outlook-map eval  --config eval.json --out report      (report.csv + report.json)
//   outlook-map study --config study.json --out study      (study_curve.csv/.json + study_summary.json)
//
// Exit codes: 0 success, 2 input or configuration error, 3 property-check failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "outlook/data_model.hpp"
#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/procrustes.hpp"
#include "outlook/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace outlook;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitProperty = 3;
constexpr double kRobustTolerance = 1e-9;

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("write failed: " + path.string());
}

/// Strips a .csv/.json extension so --out works as a prefix either way.
fs::path output_prefix(const std::string& out) {
  fs::path p(out);
  if (p.extension() == ".csv" || p.extension() == ".json") p.replace_extension();
  return p;
}

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return prefix.parent_path() / (prefix.filename().string() + suffix);
}

unsigned resolve_threads(int flag) {
  if (flag > 0) return static_cast<unsigned>(flag);
  if (const char* env = std::getenv("OUTLOOK_MAP_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw InputError("OUTLOOK_MAP_THREADS must be a positive integer");
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config key '") + key + "': " + e.what());
  }
}

std::vector<Outlook> load_outlooks(const json& cfg, const fs::path& base) {
  if (!cfg.contains("outlooks") || !cfg["outlooks"].is_array()) throw InputError("config: 'outlooks' list required");
  std::vector<Outlook> out;
  for (const auto& entry : cfg["outlooks"]) {
    const auto path_str = get_or<std::string>(entry, "path", "");
    if (path_str.empty()) throw InputError("config: every outlook needs a 'path'");
    fs::path path(path_str);
    if (path.is_relative()) path = base / path;
    const auto id = get_or<std::string>(entry, "id", path.stem().string());
    out.push_back(load_csv(path, id));
  }
  return out;
}

const Outlook& by_id(const std::vector<Outlook>& outlooks, const std::string& id) {
  for (const auto& o : outlooks) {
    if (o.id == id) return o;
  }
  throw InputError("config: unknown outlook id '" + id + "'");
}

FitOptions fit_options(const json& cfg) {
  FitOptions opts;
  opts.scale = get_or<bool>(cfg, "scale", true);
  opts.winsor_fraction = get_or<double>(cfg, "winsor_fraction", kDefaultWinsorFraction);
  return opts;
}

void report_fit(const OutlookMapping& m) {
  for (const auto& c : m.classes) {
    std::cerr << m.source_id << " -> " << m.target_id << " class " << c.class_index
              << ": procrustes objective " << c.objective << '\n';
    if (c.near_degenerate) {
      std::cerr << "warning: " << m.source_id << " -> " << m.target_id << " class " << c.class_index
                << ": near-degenerate eigenvalue gap, principal directions are unstable\n";
    }
    if (c.rank_deficient) {
      std::cerr << "warning: " << m.source_id << " -> " << m.target_id << " class " << c.class_index
                << ": h exceeds the numerical rank of a class covariance\n";
    }
  }
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string spec;
  std::string config;
  std::string counts;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string transform;
  std::string id;
  bool unit_moment = false;
};

std::vector<int> parse_counts(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError("--counts: '" + item + "' is not an integer");
    }
  }
  return out;
}

int run_gen(const GenArgs& a) {
  json cfg = a.config.empty() ? json::object() : read_json(a.config);
  const fs::path base = a.config.empty() ? fs::path(".") : fs::path(a.config).parent_path();
  MixtureSpec spec;
  if (!a.spec.empty()) {
    spec = read_json(a.spec).get<MixtureSpec>();
  } else if (cfg.contains("spec")) {
    spec = cfg["spec"].is_string() ? read_json(base / cfg["spec"].get<std::string>()).get<MixtureSpec>()
                                   : cfg["spec"].get<MixtureSpec>();
  } else {
    throw InputError("gen: --spec (or a config with 'spec') is required");
  }
  if (a.unit_moment || get_or<bool>(cfg, "unit_second_moment", false)) spec = scale_spec_to_unit_second_moment(spec);

  std::vector<int> counts = a.counts.empty() ? get_or<std::vector<int>>(cfg, "counts", {}) : parse_counts(a.counts);
  if (counts.empty()) throw InputError("gen: --counts is required");
  const auto seed = a.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
  const std::string out = a.out.empty() ? get_or<std::string>(cfg, "out", "") : a.out;
  if (out.empty()) throw InputError("gen: --out is required");

  const fs::path out_path(out);
  const auto outlook = sample_mixture(spec, counts, seed, a.id.empty() ? out_path.stem().string() : a.id);
  std::ostringstream csv;
  write_csv(csv, outlook);
  write_text(out_path, csv.str());

  std::string transform = a.transform.empty() ? get_or<std::string>(cfg, "transform", "") : a.transform;
  if (!transform.empty()) {
    GroundTruthTransform t;
    if (transform == "identity") {
      t = identity_transform(spec.dim, spec.num_classes());
    } else if (transform == "random") {
      t.rotation = random_orthogonal(spec.dim, seed ^ 0x7a11ULL);
      const auto shifts = random_orthogonal(std::max<Index>(spec.dim, spec.num_classes()), seed ^ 0x5a1fULL);
      for (int i = 0; i < spec.num_classes(); ++i) t.translations.push_back(shifts.col(i).head(spec.dim));
    } else {
      t = read_json(transform).get<GroundTruthTransform>();
    }
    const auto second = transform_outlook(outlook, t);
    std::ostringstream csv2;
    write_csv(csv2, second);
    const auto prefix = output_prefix(out);
    write_text(with_suffix(prefix, "_transformed.csv"), csv2.str());
    write_text(with_suffix(prefix, "_transform.json"), json(t).dump(2) + "\n");
  }
  std::cerr << "gen: wrote " << outlook.size() << " rows to " << out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct CommonArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> h;
  int threads = 0;
};

int run_fit(const CommonArgs& a) {
  if (a.config.empty()) throw InputError("fit: --config is required");
  if (a.out.empty()) throw InputError("fit: --out is required");
  const json cfg = read_json(a.config);
  const fs::path base = fs::path(a.config).parent_path();
  const auto outlooks = load_outlooks(cfg, base);
  const auto mode = get_or<std::string>(cfg, "mode", outlooks.size() > 2 ? "multi-outlook" : "two-outlook");
  const Index h = a.h ? *a.h : get_or<Index>(cfg, "h", 0);
  if (h < 1) throw InputError("fit: h must be set via config or --h");
  const auto opts = fit_options(cfg);

  if (mode == "two-outlook") {
    if (outlooks.size() < 2) throw InputError("fit: two-outlook mode needs two outlooks");
    const auto target_id = get_or<std::string>(cfg, "target", outlooks[0].id);
    std::string source_id = get_or<std::string>(cfg, "source", "");
    if (source_id.empty()) {
      for (const auto& o : outlooks) {
        if (o.id != target_id) {
          source_id = o.id;
          break;
        }
      }
    }
    const auto mapping = fit_two_outlooks(by_id(outlooks, target_id), by_id(outlooks, source_id), h, opts);
    report_fit(mapping);
    save_mapping(mapping, a.out);
  } else if (mode == "multi-outlook") {
    const auto final_id = get_or<std::string>(cfg, "final", get_or<std::string>(cfg, "target", outlooks[0].id));
    const auto model = fit_multi_outlook(outlooks, final_id, h, opts);
    for (const auto& m : model.mappings) report_fit(m);
    std::cerr << "multi-outlook alignment objective: " << model.alignment_objective << '\n';
    save_mapping(model, a.out);
  } else {
    throw InputError("fit: unknown mode '" + mode + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct MapArgs {
  std::string model;
  std::string input;
  std::string out;
  std::string outlook;
  bool padded = false;
};

int run_map(const MapArgs& a) {
  if (a.model.empty() || a.input.empty() || a.out.empty()) throw InputError("map: --model, --input and --out are required");
  const auto model = load_mapping(a.model);
  const auto input = load_csv(a.input);
  Matrix mapped;
  if (const auto* m = std::get_if<OutlookMapping>(&model)) {
    mapped = apply_mapping(*m, input.features, input.labels);
    if (!a.padded) mapped = to_target_space(*m, mapped);
  } else {
    const auto& multi = std::get<MultiOutlookModel>(model);
    if (a.outlook.empty()) throw InputError("map: --outlook is required for a multi-outlook model");
    if (a.outlook == multi.final_id) {
      const auto& scaler = multi.scalers.at(multi.final_id);
      mapped = scaler ? apply_scaler(*scaler, input.features) : input.features;
    } else {
      const auto& m = multi.mapping_for(a.outlook);
      mapped = apply_mapping(m, input.features, input.labels);
      if (!a.padded) mapped = to_target_space(m, mapped);
    }
  }
  std::ostringstream csv;
  write_csv(csv, mapped, input.labels);
  write_text(a.out, csv.str());
  std::cerr << "map: wrote " << mapped.rows() << " rows to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

ExperimentConfig experiment_config(const json& cfg, const fs::path& base, const CommonArgs& a) {
  ExperimentConfig ec;
  ec.outlooks = load_outlooks(cfg, base);
  ec.target_id = get_or<std::string>(cfg, "target", ec.outlooks.empty() ? "" : ec.outlooks[0].id);
  ec.source_ids = get_or<std::vector<std::string>>(cfg, "sources", {});
  ec.h = a.h ? *a.h : get_or<Index>(cfg, "h", 0);
  if (!a.h) ec.h_candidates = get_or<std::vector<Index>>(cfg, "h_candidates", {});
  ec.h_selection_fraction = get_or<double>(cfg, "h_selection_fraction", 0.5);
  ec.label_fractions = get_or<std::vector<double>>(cfg, "label_fractions", {0.05});
  ec.folds = get_or<int>(cfg, "folds", 10);
  ec.seed = a.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));
  ec.k = get_or<int>(cfg, "k", 5);
  ec.scale = get_or<bool>(cfg, "scale", true);
  ec.winsor_fraction = get_or<double>(cfg, "winsor_fraction", kDefaultWinsorFraction);
  for (const auto& name : get_or<std::vector<std::string>>(cfg, "methods", {})) ec.methods.push_back(parse_method(name));
  ec.threads = resolve_threads(a.threads);
  return ec;
}

int run_eval(const CommonArgs& a) {
  if (a.config.empty()) throw InputError("eval: --config is required");
  if (a.out.empty()) throw InputError("eval: --out is required");
  const json cfg = read_json(a.config);
  const auto ec = experiment_config(cfg, fs::path(a.config).parent_path(), a);
  const auto mode = get_or<std::string>(cfg, "mode", "two-outlook");
  ExperimentReport report;
  if (mode == "two-outlook") {
    report = run_transfer_experiment(ec);
  } else if (mode == "multi-source") {
    report = run_multi_source_experiment(ec);
  } else {
    throw InputError("eval: unknown mode '" + mode + "'");
  }
  const auto prefix = output_prefix(a.out);
  std::ostringstream csv;
  write_report_csv(csv, report);
  write_text(with_suffix(prefix, ".csv"), csv.str());
  write_text(with_suffix(prefix, ".json"), json(report).dump(2) + "\n");
  std::cerr << "eval: h = " << report.h << ", " << report.cells.size() << " cells\n";
  for (const auto& agg : report.aggregates()) {
    std::cerr << "  " << agg.component << " " << to_string(agg.method) << " fraction " << agg.fraction << ": BER "
              << agg.mean << " +- " << agg.std << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

int run_study(const CommonArgs& a) {
  if (a.out.empty()) throw InputError("study: --out is required");
  const json cfg = a.config.empty() ? json::object() : read_json(a.config);
  const fs::path base = a.config.empty() ? fs::path(".") : fs::path(a.config).parent_path();
  const unsigned threads = resolve_threads(a.threads);
  const auto seed = a.seed.value_or(get_or<std::uint64_t>(cfg, "seed", 0));

  MixtureSpec spec = default_study_spec();
  if (cfg.contains("spec")) {
    spec = cfg["spec"].is_string() ? read_json(base / cfg["spec"].get<std::string>()).get<MixtureSpec>()
                                   : cfg["spec"].get<MixtureSpec>();
  }
  GroundTruthTransform transform = default_study_transform();
  if (cfg.contains("transform")) {
    if (cfg["transform"] == "random") {
      transform.rotation = random_orthogonal(spec.dim, seed ^ 0x7a11ULL);
      transform.translations.assign(static_cast<std::size_t>(spec.num_classes()), Vector::Constant(spec.dim, 0.25));
    } else {
      transform = cfg["transform"].is_string()
                      ? read_json(base / cfg["transform"].get<std::string>()).get<GroundTruthTransform>()
                      : cfg["transform"].get<GroundTruthTransform>();
    }
  }
  const auto sizes = get_or<std::vector<int>>(cfg, "sizes", {50, 200, 800, 3200});
  const int seeds = get_or<int>(cfg, "seeds_per_size", 20);
  const Index h = a.h ? *a.h : get_or<Index>(cfg, "h", 2);

  const auto curve = sample_complexity_study(spec, transform, sizes, seeds, h, seed, threads);
  const auto medians = curve.median_max_errors();
  bool curve_ok = true;
  for (std::size_t i = 1; i < medians.size(); ++i) curve_ok = curve_ok && medians[i] <= medians[i - 1];

  RobustCheckConfig rc;
  const json robust = get_or<json>(cfg, "robust", json::object());
  rc.instances = get_or<int>(robust, "instances", 50);
  rc.samples = get_or<int>(robust, "samples", 100000);
  rc.rho_values = get_or<std::vector<double>>(robust, "rho", {0.1, 1.0, 10.0});
  rc.dim = get_or<Index>(robust, "dim", 3);
  rc.columns = get_or<Index>(robust, "columns", 2);
  rc.seed = seed;
  rc.threads = threads;
  const auto rr = robust_additivity_check(rc);
  const bool robust_ok = rr.max_sampled_excess <= kRobustTolerance && rr.max_analytic_gap <= kRobustTolerance;

  const auto prefix = output_prefix(a.out);
  std::ostringstream csv;
  write_curve_csv(csv, curve);
  write_text(with_suffix(prefix, "_curve.csv"), csv.str());
  write_text(with_suffix(prefix, "_curve.json"), json(curve).dump(2) + "\n");
  const json summary = {{"curve_non_increasing", curve_ok},
                        {"median_max_errors", medians},
                        {"loglog_slope", sizes.size() >= 2 ? json(curve.loglog_slope()) : json(nullptr)},
                        {"robust_max_sampled_excess", rr.max_sampled_excess},
                        {"robust_max_analytic_gap", rr.max_analytic_gap},
                        {"robust_cases", rr.evaluated},
                        {"robust_pass", robust_ok}};
  write_text(with_suffix(prefix, "_summary.json"), summary.dump(2) + "\n");

  std::cout << "robust_check sampled_max_minus_bound=" << rr.max_sampled_excess
            << " analytic_gap=" << rr.max_analytic_gap << " tolerance=" << kRobustTolerance
            << (robust_ok ? " PASS" : " FAIL") << '\n';
  std::cout << "complexity_curve medians_non_increasing=" << (curve_ok ? "true" : "false")
            << " slope=" << (sizes.size() >= 2 ? curve.loglog_slope() : 0.0) << (curve_ok ? " PASS" : " FAIL") << '\n';
  return robust_ok && curve_ok ? 0 : kExitProperty;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map labeled data between heterogeneous feature spaces"};
  app.require_subcommand(1);
  // "-h" is taken by the --h option; keep only the long help flag.
  app.set_help_flag("--help", "Print this help message and exit");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Sample an outlook CSV from a Gaussian mixture spec");
  gen_cmd->add_option("--spec", gen.spec, "Mixture spec JSON");
  gen_cmd->add_option("--config", gen.config, "Config JSON (spec, counts, seed, out, transform)");
  gen_cmd->add_option("--counts", gen.counts, "Samples per class, comma separated");
  gen_cmd->add_option("--seed", gen.seed, "Random seed");
  gen_cmd->add_option("--out", gen.out, "Output CSV");
  gen_cmd->add_option("--transform", gen.transform,
                      "Also emit a transformed copy: 'identity', 'random', or a transform JSON path");
  gen_cmd->add_option("--id", gen.id, "Outlook id");
  gen_cmd->add_flag("--unit-second-moment", gen.unit_moment, "Rescale the spec to unit second moment first");

  CommonArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a two-outlook or multi-outlook mapping");
  CommonArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run a transfer experiment and write a BER report");
  CommonArgs study;
  auto* study_cmd = app.add_subcommand("study", "Run the sample-complexity study and robust checks");
  for (auto [cmd, args] : {std::pair{fit_cmd, &fit}, std::pair{eval_cmd, &eval}, std::pair{study_cmd, &study}}) {
    cmd->add_option("--config", args->config, "Config JSON");
    cmd->add_option("--out", args->out, "Output path or prefix");
    cmd->add_option("--seed", args->seed, "Override the config seed");
    cmd->add_option("--h", args->h, "Override the number of principal directions");
    cmd->add_option("--threads", args->threads, "Worker threads (fallback: OUTLOOK_MAP_THREADS)");
  }

  MapArgs map;
  auto* map_cmd = app.add_subcommand("map", "Map labeled rows through a fitted model");
  map_cmd->add_option("--model", map.model, "Mapping JSON");
  map_cmd->add_option("--input", map.input, "Input CSV in the source space");
  map_cmd->add_option("--out", map.out, "Output CSV");
  map_cmd->add_option("--outlook", map.outlook, "Source outlook id (multi-outlook models)");
  map_cmd->add_flag("--padded", map.padded, "Keep the zero-padded coordinates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*fit_cmd) return run_fit(fit);
    if (*map_cmd) return run_map(map);
    if (*eval_cmd) return run_eval(eval);
    if (*study_cmd) return run_study(study);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
