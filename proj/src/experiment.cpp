#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <map>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/parallel.hpp"
#include "outlook/rng.hpp"

namespace outlook {

namespace {

constexpr std::uint64_t kFoldStream = 0xf01d5ULL;
constexpr std::uint64_t kLabelStream = 0x1abe1ULL;
constexpr std::uint64_t kSelectStream = 0x5e1ecULL;

const std::vector<Method> kAllMethods = {Method::kTrg, Method::kSrc,   Method::kAll,
                                         Method::kFeda, Method::kMomap, Method::kOpt};

bool needs_common_space(Method m) { return m == Method::kSrc || m == Method::kAll || m == Method::kFeda; }

const Outlook& find_outlook(const std::vector<Outlook>& outlooks, const std::string& id) {
  for (const auto& o : outlooks) {
    if (o.id == id) return o;
  }
  throw InputError("experiment: unknown outlook '" + id + "'");
}

/// Training rows and labels accumulated from several blocks.
struct TrainingSet {
  std::vector<Matrix> blocks;
  std::vector<int> labels;

  void add(Matrix x, std::span<const int> y) {
    blocks.push_back(std::move(x));
    labels.insert(labels.end(), y.begin(), y.end());
  }
  Matrix stacked() const {
    Index rows = 0;
    const Index cols = blocks.empty() ? 0 : blocks.front().cols();
    for (const auto& b : blocks) rows += b.rows();
    Matrix out(rows, cols);
    Index at = 0;
    for (const auto& b : blocks) {
      out.middleRows(at, b.rows()) = b;
      at += b.rows();
    }
    return out;
  }
};

BerResult train_and_score(const TrainingSet& train, const Matrix& test_x, std::span<const int> test_y, int k, int c) {
  const auto predicted = knn_classify(train.stacked(), train.labels, test_x, k);
  return balanced_error_rate(predicted, test_y, c);
}

/// FEDA feature replication: [x, x in the slot of its domain, zeros elsewhere].
Matrix augment_domain(const Matrix& x, std::size_t domain, std::size_t domains) {
  const Index d = x.cols();
  Matrix out = Matrix::Zero(x.rows(), d * static_cast<Index>(domains + 1));
  out.leftCols(d) = x;
  out.middleCols(d * static_cast<Index>(domain + 1), d) = x;
  return out;
}

Matrix maybe_scale(const std::optional<ScalerParams>& s, const Matrix& x) { return s ? apply_scaler(*s, x) : x; }

std::optional<ScalerParams> maybe_fit(const ExperimentConfig& cfg, const Matrix& x) {
  if (!cfg.scale) return std::nullopt;
  return fit_scaler(x, cfg.winsor_fraction);
}

std::vector<Method> resolve_methods(const ExperimentConfig& cfg, bool common_space, bool multi) {
  std::vector<Method> methods = cfg.methods;
  if (methods.empty()) {
    for (Method m : kAllMethods) {
      if (needs_common_space(m) && !common_space) continue;
      if (multi && m == Method::kSrc) continue;
      methods.push_back(m);
    }
  }
  for (Method m : methods) {
    if (needs_common_space(m) && !common_space) {
      throw InputError("experiment: method " + to_string(m) + " needs a common feature space, but outlook dimensions differ");
    }
    if (multi && m == Method::kSrc) throw InputError("experiment: SRC does not apply to multi-source experiments");
  }
  return methods;
}

void check_config(const ExperimentConfig& cfg) {
  if (cfg.folds < 2) throw InputError("experiment: folds must be at least 2");
  if (cfg.label_fractions.empty()) throw InputError("experiment: no label fractions");
  for (double f : cfg.label_fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw InputError("experiment: label fraction " + std::to_string(f) + " outside (0, 1]");
  }
  if (cfg.k < 1) throw InputError("experiment: k must be at least 1");
  for (std::size_t i = 0; i < cfg.outlooks.size(); ++i) {
    cfg.outlooks[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (cfg.outlooks[i].id == cfg.outlooks[j].id) {
        throw InputError("experiment: duplicate outlook id '" + cfg.outlooks[i].id + "'");
      }
    }
  }
}

int experiment_classes(const std::vector<Outlook>& outlooks) {
  int c = 0;
  for (const auto& o : outlooks) c = std::max(c, o.num_classes());
  return c;
}

/// Rows of `pool` (indices into the outlook) kept as labeled for one cell.
/// At least two per class, the minimum a class covariance needs.
std::vector<Index> labeled_rows(const Outlook& o, const std::vector<Index>& pool, double fraction, std::uint64_t seed,
                                std::size_t fraction_index, int fold) {
  const auto pool_outlook = subset(o, pool);
  const auto split =
      stratified_split(pool_outlook, fraction, stream_key({seed, kLabelStream, fraction_index, static_cast<std::uint64_t>(fold)}), 2);
  std::vector<Index> rows;
  rows.reserve(split.train_rows.size());
  for (auto r : split.train_rows) rows.push_back(pool[static_cast<std::size_t>(r)]);
  return rows;
}

Index resolve_h(const ExperimentConfig& cfg, const Outlook& target, const Outlook& source) {
  if (cfg.h_candidates.empty()) {
    if (cfg.h < 1) throw InputError("experiment: h must be set (or h_candidates given)");
    return cfg.h;
  }
  SelectHOptions opts;
  opts.label_fraction = cfg.h_selection_fraction;
  opts.k = cfg.k;
  opts.scale = cfg.scale;
  opts.winsor_fraction = cfg.winsor_fraction;
  return select_h(target, source, cfg.h_candidates, stream_key({cfg.seed, kSelectStream}), opts);
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::kTrg: return "TRG";
    case Method::kSrc: return "SRC";
    case Method::kAll: return "ALL";
    case Method::kFeda: return "FEDA";
    case Method::kMomap: return "MOMAP";
    case Method::kOpt: return "OPT";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  std::string upper = name;
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
  for (Method m : kAllMethods) {
    if (to_string(m) == upper) return m;
  }
  throw InputError("unknown method '" + name + "'");
}

const ReportCell& ExperimentReport::cell(const std::string& component, Method method, double fraction, int fold) const {
  for (const auto& c : cells) {
    if (c.component == component && c.method == method && c.fraction == fraction && c.fold == fold) return c;
  }
  throw InputError("report: no cell for " + component + "/" + to_string(method));
}

std::vector<Aggregate> ExperimentReport::aggregates() const {
  std::vector<Aggregate> out;
  for (double f : label_fractions) {
    for (const auto& comp : components) {
      for (Method m : methods) {
        std::vector<double> values;
        for (const auto& c : cells) {
          if (c.component == comp && c.method == m && c.fraction == f) values.push_back(c.result.ber);
        }
        Aggregate a{comp, m, f, 0.0, 0.0, static_cast<int>(values.size())};
        if (!values.empty()) {
          for (double v : values) a.mean += v;
          a.mean /= static_cast<double>(values.size());
          if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - a.mean) * (v - a.mean);
            a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
          }
        }
        out.push_back(a);
      }
    }
  }
  return out;
}

double ExperimentReport::mean_ber(Method method, double fraction) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& c : cells) {
    if (c.method == method && c.fraction == fraction) {
      sum += c.result.ber;
      ++n;
    }
  }
  if (n == 0) throw InputError("report: no cells for " + to_string(method));
  return sum / n;
}

Index select_h(const Outlook& target, const Outlook& source, std::span<const Index> candidates, std::uint64_t seed,
               const SelectHOptions& options) {
  if (candidates.empty()) throw InputError("select_h: no candidates");
  std::vector<Index> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  const Index max_h = std::min(target.dim(), source.dim());
  for (Index h : sorted) {
    if (h < 1 || h > max_h) {
      throw InputError("select_h: candidate " + std::to_string(h) + " outside [1, " + std::to_string(max_h) + "]");
    }
  }
  if (sorted.size() == 1) return sorted.front();

  const int c = std::max(target.num_classes(), source.num_classes());
  const auto split = stratified_split(target, options.label_fraction, seed, 2);
  if (split.test_rows.empty()) throw InputError("select_h: split leaves no test rows");
  const auto labeled = subset(target, split.train_rows);
  const auto test = subset(target, split.test_rows);

  FitOptions fit;
  fit.scale = options.scale;
  fit.winsor_fraction = options.winsor_fraction;
  fit.num_classes = c;
  if (options.scale) fit.target_scaler = fit_scaler(target.features, options.winsor_fraction);
  const Matrix test_x = fit.target_scaler ? apply_scaler(*fit.target_scaler, test.features) : test.features;

  Index best = sorted.front();
  double best_ber = 2.0;
  for (Index h : sorted) {
    const auto mapping = fit_two_outlooks(labeled, source, h, fit);
    const Matrix mapped = to_target_space(mapping, apply_mapping(mapping, source.features, source.labels));
    const auto predicted = knn_classify(mapped, source.labels, test_x, options.k);
    const double ber = balanced_error_rate(predicted, test.labels, c).ber;
    if (ber < best_ber) {
      best_ber = ber;
      best = h;
    }
  }
  return best;
}

ExperimentReport run_transfer_experiment(const ExperimentConfig& cfg) {
  check_config(cfg);
  const Outlook& target = find_outlook(cfg.outlooks, cfg.target_id);
  std::vector<const Outlook*> sources;
  if (cfg.source_ids.empty()) {
    for (const auto& o : cfg.outlooks) {
      if (o.id != cfg.target_id) sources.push_back(&o);
    }
  } else {
    for (const auto& id : cfg.source_ids) {
      if (id == cfg.target_id) throw InputError("experiment: target listed as its own source");
      sources.push_back(&find_outlook(cfg.outlooks, id));
    }
  }
  if (sources.empty()) throw InputError("experiment: no source outlooks");
  bool common = true;
  for (const auto* s : sources) common = common && s->dim() == target.dim();

  const int c = experiment_classes(cfg.outlooks);
  ExperimentReport report;
  report.methods = resolve_methods(cfg, common, false);
  report.label_fractions = cfg.label_fractions;
  report.components = {target.id};
  report.folds = cfg.folds;
  const bool wants_momap =
      std::find(report.methods.begin(), report.methods.end(), Method::kMomap) != report.methods.end();
  report.h = wants_momap ? resolve_h(cfg, target, *sources.front()) : cfg.h;

  // Source scaling depends only on the source data.
  std::vector<std::optional<ScalerParams>> source_scalers;
  std::vector<Matrix> source_scaled;
  for (const auto* s : sources) {
    source_scalers.push_back(maybe_fit(cfg, s->features));
    source_scaled.push_back(maybe_scale(source_scalers.back(), s->features));
  }

  const auto splits = stratified_kfold(target, cfg.folds, stream_key({cfg.seed, kFoldStream}));
  const std::size_t tasks = cfg.label_fractions.size() * static_cast<std::size_t>(cfg.folds);
  std::vector<std::vector<ReportCell>> slots(tasks);

  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t fi = task / static_cast<std::size_t>(cfg.folds);
    const int fold = static_cast<int>(task % static_cast<std::size_t>(cfg.folds));
    const double fraction = cfg.label_fractions[fi];
    const auto& split = splits[static_cast<std::size_t>(fold)];

    const auto target_scaler = maybe_fit(cfg, select_rows(target.features, split.train_rows));
    const auto labeled = labeled_rows(target, split.train_rows, fraction, cfg.seed, fi, fold);
    const auto labeled_outlook = subset(target, labeled);
    const auto pool_outlook = subset(target, split.train_rows);
    const auto test_outlook = subset(target, split.test_rows);
    const Matrix labeled_x = maybe_scale(target_scaler, labeled_outlook.features);
    const Matrix test_x = maybe_scale(target_scaler, test_outlook.features);
    const std::span<const int> test_y = test_outlook.labels;

    auto& out = slots[task];
    for (Method method : report.methods) {
      TrainingSet train;
      Matrix eval_x = test_x;
      switch (method) {
        case Method::kTrg:
          train.add(labeled_x, labeled_outlook.labels);
          break;
        case Method::kOpt:
          train.add(maybe_scale(target_scaler, pool_outlook.features), pool_outlook.labels);
          break;
        case Method::kSrc:
          for (std::size_t s = 0; s < sources.size(); ++s) train.add(source_scaled[s], sources[s]->labels);
          break;
        case Method::kAll:
          train.add(labeled_x, labeled_outlook.labels);
          for (std::size_t s = 0; s < sources.size(); ++s) train.add(source_scaled[s], sources[s]->labels);
          break;
        case Method::kFeda: {
          const std::size_t domains = sources.size() + 1;
          train.add(augment_domain(labeled_x, 0, domains), labeled_outlook.labels);
          for (std::size_t s = 0; s < sources.size(); ++s) {
            train.add(augment_domain(source_scaled[s], s + 1, domains), sources[s]->labels);
          }
          eval_x = augment_domain(test_x, 0, domains);
          break;
        }
        case Method::kMomap: {
          for (std::size_t s = 0; s < sources.size(); ++s) {
            FitOptions fit;
            fit.scale = cfg.scale;
            fit.winsor_fraction = cfg.winsor_fraction;
            fit.num_classes = c;
            fit.target_scaler = target_scaler;
            fit.source_scaler = source_scalers[s];
            const auto mapping = fit_two_outlooks(labeled_outlook, *sources[s], report.h, fit);
            train.add(to_target_space(mapping, apply_mapping(mapping, sources[s]->features, sources[s]->labels)),
                      sources[s]->labels);
          }
          break;
        }
      }
      out.push_back({target.id, method, fraction, fold, train_and_score(train, eval_x, test_y, cfg.k, c)});
    }
  });

  for (auto& s : slots) {
    for (auto& cell : s) report.cells.push_back(std::move(cell));
  }
  return report;
}

ExperimentReport run_multi_source_experiment(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto& outlooks = cfg.outlooks;
  if (outlooks.size() < 2) throw InputError("multi-source experiment: need at least 2 outlooks");
  bool common = true;
  for (const auto& o : outlooks) common = common && o.dim() == outlooks.front().dim();
  const int c = experiment_classes(outlooks);
  const std::size_t m = outlooks.size();

  ExperimentReport report;
  report.methods = resolve_methods(cfg, common, true);
  report.label_fractions = cfg.label_fractions;
  report.folds = cfg.folds;
  for (const auto& o : outlooks) report.components.push_back(o.id);
  const bool wants_momap =
      std::find(report.methods.begin(), report.methods.end(), Method::kMomap) != report.methods.end();
  report.h = wants_momap ? resolve_h(cfg, outlooks[0], outlooks[1]) : cfg.h;

  // One fold stream for every outlook, so outlooks with identical content
  // receive identical splits.
  std::vector<std::vector<DatasetSplit>> splits;
  for (const auto& o : outlooks) splits.push_back(stratified_kfold(o, cfg.folds, stream_key({cfg.seed, kFoldStream})));

  const std::size_t tasks = cfg.label_fractions.size() * static_cast<std::size_t>(cfg.folds);
  std::vector<std::vector<ReportCell>> slots(tasks);
  parallel_for(tasks, cfg.threads, [&](std::size_t task) {
    const std::size_t fi = task / static_cast<std::size_t>(cfg.folds);
    const int fold = static_cast<int>(task % static_cast<std::size_t>(cfg.folds));
    const double fraction = cfg.label_fractions[fi];

    std::vector<std::optional<ScalerParams>> scalers(m);
    std::vector<Outlook> labeled(m), pool(m), test(m);
    std::vector<Matrix> labeled_x(m), test_x(m);
    FitOptions fit;
    fit.scale = cfg.scale;
    fit.winsor_fraction = cfg.winsor_fraction;
    fit.num_classes = c;
    for (std::size_t j = 0; j < m; ++j) {
      const auto& split = splits[j][static_cast<std::size_t>(fold)];
      scalers[j] = maybe_fit(cfg, select_rows(outlooks[j].features, split.train_rows));
      if (scalers[j]) fit.outlook_scalers[outlooks[j].id] = *scalers[j];
      labeled[j] = subset(outlooks[j], labeled_rows(outlooks[j], split.train_rows, fraction, cfg.seed, fi, fold));
      pool[j] = subset(outlooks[j], split.train_rows);
      test[j] = subset(outlooks[j], split.test_rows);
      labeled_x[j] = maybe_scale(scalers[j], labeled[j].features);
      test_x[j] = maybe_scale(scalers[j], test[j].features);
    }

    auto& out = slots[task];
    for (std::size_t k = 0; k < m; ++k) {
      for (Method method : report.methods) {
        TrainingSet train;
        Matrix eval_x = test_x[k];
        switch (method) {
          case Method::kTrg:
            train.add(labeled_x[k], labeled[k].labels);
            break;
          case Method::kOpt:
            train.add(maybe_scale(scalers[k], pool[k].features), pool[k].labels);
            break;
          case Method::kAll:
            for (std::size_t j = 0; j < m; ++j) train.add(labeled_x[j], labeled[j].labels);
            break;
          case Method::kFeda:
            for (std::size_t j = 0; j < m; ++j) train.add(augment_domain(labeled_x[j], j, m), labeled[j].labels);
            eval_x = augment_domain(test_x[k], k, m);
            break;
          case Method::kMomap: {
            const auto model = fit_multi_outlook(labeled, outlooks[k].id, report.h, fit);
            train.add(labeled_x[k], labeled[k].labels);
            for (std::size_t j = 0; j < m; ++j) {
              if (j == k) continue;
              const auto& mapping = model.mapping_for(outlooks[j].id);
              train.add(to_target_space(mapping, apply_mapping(mapping, labeled[j].features, labeled[j].labels)),
                        labeled[j].labels);
            }
            break;
          }
          case Method::kSrc:
            break;
        }
        out.push_back({outlooks[k].id, method, fraction, fold, train_and_score(train, eval_x, test[k].labels, cfg.k, c)});
      }
    }
  });

  for (auto& s : slots) {
    for (auto& cell : s) report.cells.push_back(std::move(cell));
  }
  return report;
}

namespace {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

nlohmann::json nan_safe(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

}  // namespace

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  std::string buf = "component,method,fraction,fold,class,value\n";
  for (const auto& c : report.cells) {
    const std::string prefix =
        c.component + "," + to_string(c.method) + "," + format_double(c.fraction) + "," + std::to_string(c.fold) + ",";
    buf += prefix + "ber," + format_double(c.result.ber) + "\n";
    for (Index i = 0; i < c.result.per_class_error_rate.size(); ++i) {
      buf += prefix + std::to_string(i + 1) + "," + format_double(c.result.per_class_error_rate(i)) + "\n";
    }
  }
  out << buf;
}

void to_json(nlohmann::json& j, const ExperimentReport& report) {
  auto methods = nlohmann::json::array();
  for (Method m : report.methods) methods.push_back(to_string(m));
  auto cells = nlohmann::json::array();
  for (const auto& c : report.cells) {
    auto rates = nlohmann::json::array();
    for (Index i = 0; i < c.result.per_class_error_rate.size(); ++i) rates.push_back(nan_safe(c.result.per_class_error_rate(i)));
    auto confusion = nlohmann::json::array();
    for (Index r = 0; r < c.result.confusion.rows(); ++r) {
      auto row = nlohmann::json::array();
      for (Index k = 0; k < c.result.confusion.cols(); ++k) row.push_back(c.result.confusion(r, k));
      confusion.push_back(std::move(row));
    }
    cells.push_back({{"component", c.component},
                     {"method", to_string(c.method)},
                     {"fraction", c.fraction},
                     {"fold", c.fold},
                     {"ber", c.result.ber},
                     {"per_class_error_rate", std::move(rates)},
                     {"confusion", std::move(confusion)},
                     {"excluded_classes", c.result.excluded_classes}});
  }
  auto aggregates = nlohmann::json::array();
  for (const auto& a : report.aggregates()) {
    aggregates.push_back({{"component", a.component},
                          {"method", to_string(a.method)},
                          {"fraction", a.fraction},
                          {"mean", a.mean},
                          {"std", a.std},
                          {"folds", a.count}});
  }
  j = {{"methods", std::move(methods)},
       {"label_fractions", report.label_fractions},
       {"components", report.components},
       {"folds", report.folds},
       {"h", report.h},
       {"cells", std::move(cells)},
       {"aggregates", std::move(aggregates)}};
}

}  // namespace outlook
