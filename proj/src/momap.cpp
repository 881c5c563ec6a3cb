#include "outlook/momap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "outlook/procrustes.hpp"

namespace outlook {

namespace {

constexpr double kOrthogonalityTolerance = 1e-10;

std::string class_name(int i) { return "class " + std::to_string(i); }

bool is_orthogonal(const Matrix& r) {
  if (r.rows() != r.cols()) return false;
  return (r.transpose() * r - Matrix::Identity(r.rows(), r.cols())).cwiseAbs().maxCoeff() <= kOrthogonalityTolerance;
}

/// Per-class moments of an outlook, after optional scaling, with errors that
/// name the outlook, the class, and its sample count.
std::vector<ClassMoments> outlook_moments(const Outlook& o, const Matrix& features, int num_classes) {
  std::vector<ClassMoments> out;
  const auto views = class_partition(o, num_classes);
  for (const auto& view : views) {
    const auto n = view.rows.size();
    if (n == 0) {
      throw InputError("outlook '" + o.id + "' is missing " + class_name(view.class_index) + " (0 samples)");
    }
    if (n < 2) {
      throw InputError("outlook '" + o.id + "' has " + std::to_string(n) + " sample of " +
                       class_name(view.class_index) + ", need at least 2");
    }
    out.push_back(class_moments(select_rows(features, view.rows)));
  }
  return out;
}

Matrix pad_columns(const Matrix& m, Index cols) {
  Matrix out = Matrix::Zero(m.rows(), cols);
  out.leftCols(m.cols()) = m;
  return out;
}

struct ClassFrame {
  Matrix target;
  Matrix source;
  bool near_degenerate = false;
  bool rank_deficient = false;
};

ClassFrame class_frame(const ClassMoments& target, const ClassMoments& source, Index h, Index padded) {
  const auto ut = utilization_matrix(target, h);
  const auto us = utilization_matrix(source, h);
  return {pad_to_dimension(ut, padded).directions, pad_to_dimension(us, padded).directions,
          ut.near_degenerate || us.near_degenerate, ut.rank_deficient || us.rank_deficient};
}

OutlookMapping fit_core(std::span<const ClassMoments> target, std::span<const ClassMoments> source, Index h,
                        Index padded_min, const std::vector<std::pair<Matrix, Matrix>>* pairs,
                        double pair_weight, FitFrames* frames) {
  if (target.size() != source.size()) {
    throw InputError("fit: outlooks disagree on the number of classes (" + std::to_string(target.size()) + " vs " +
                     std::to_string(source.size()) + ")");
  }
  if (target.empty()) throw InputError("fit: no classes");
  const Index dt = target.front().mean.size();
  const Index ds = source.front().mean.size();
  if (h < 1 || h > std::min(dt, ds)) {
    throw InputError("fit: h = " + std::to_string(h) + " outside [1, " + std::to_string(std::min(dt, ds)) + "]");
  }
  OutlookMapping m;
  m.h = h;
  m.target_dim = dt;
  m.source_dim = ds;
  m.padded_dim = std::max({dt, ds, padded_min});
  if (frames) *frames = {};
  for (std::size_t i = 0; i < target.size(); ++i) {
    auto frame = class_frame(target[i], source[i], h, m.padded_dim);
    if (pairs && (*pairs)[i].first.cols() > 0) {
      frame.target = augment_with_correspondences(frame.target, (*pairs)[i].first, pair_weight);
      frame.source = augment_with_correspondences(frame.source, (*pairs)[i].second, pair_weight);
    }
    const auto sol = match_by_rotation(frame.target, frame.source);
    ClassMapping cm;
    cm.class_index = static_cast<int>(i) + 1;
    cm.rotation = sol.rotation;
    cm.source_mean = pad_vector(source[i].mean, m.padded_dim);
    cm.target_mean = pad_vector(target[i].mean, m.padded_dim);
    cm.objective = sol.objective;
    cm.near_degenerate = frame.near_degenerate;
    cm.rank_deficient = frame.rank_deficient;
    m.classes.push_back(std::move(cm));
    if (frames) {
      frames->target.push_back(std::move(frame.target));
      frames->source.push_back(std::move(frame.source));
    }
  }
  return m;
}

}  // namespace

const ClassMapping& OutlookMapping::for_class(int class_index) const {
  if (class_index < 1 || class_index > static_cast<int>(classes.size())) {
    throw InputError("mapping " + source_id + " -> " + target_id + " has no " + class_name(class_index));
  }
  return classes[static_cast<std::size_t>(class_index - 1)];
}

void OutlookMapping::validate() const {
  if (classes.empty()) throw InputError("mapping: empty per-class list");
  if (h < 1) throw InputError("mapping: h must be positive");
  if (padded_dim < std::max(source_dim, target_dim)) {
    throw InputError("mapping: padded_dim below source/target dimension");
  }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto& c = classes[i];
    if (c.class_index != static_cast<int>(i) + 1) throw InputError("mapping: classes must be listed as 1..c");
    if (c.rotation.rows() != padded_dim || c.rotation.cols() != padded_dim) {
      throw InputError("mapping: rotation of " + class_name(c.class_index) + " has wrong shape");
    }
    if (c.source_mean.size() != padded_dim || c.target_mean.size() != padded_dim) {
      throw InputError("mapping: mean of " + class_name(c.class_index) + " has wrong length");
    }
    if (!c.rotation.allFinite() || !c.source_mean.allFinite() || !c.target_mean.allFinite()) {
      throw InputError("mapping: non-finite entries in " + class_name(c.class_index));
    }
    if (!is_orthogonal(c.rotation)) {
      throw InputError("mapping: rotation invariant violated for " + class_name(c.class_index));
    }
  }
  if (source_scaler && source_scaler->dim() != source_dim) throw InputError("mapping: source scaler dimension");
  if (target_scaler && target_scaler->dim() != target_dim) throw InputError("mapping: target scaler dimension");
}

OutlookMapping fit_from_moments(std::span<const ClassMoments> target, std::span<const ClassMoments> source, Index h,
                                Index padded_dim, FitFrames* frames) {
  return fit_core(target, source, h, padded_dim, nullptr, 0.0, frames);
}

OutlookMapping fit_two_outlooks(const Outlook& target, const Outlook& source, Index h, const FitOptions& options,
                                FitFrames* frames) {
  target.validate();
  source.validate();
  if (h < 1 || h > std::min(target.dim(), source.dim())) {
    throw InputError("fit: h = " + std::to_string(h) + " outside [1, min(" + std::to_string(target.dim()) + ", " +
                     std::to_string(source.dim()) + ")]");
  }
  const int c = std::max({options.num_classes, target.num_classes(), source.num_classes()});

  std::optional<ScalerParams> target_scaler;
  std::optional<ScalerParams> source_scaler;
  Matrix target_x = target.features;
  Matrix source_x = source.features;
  if (options.scale) {
    if (target.size() == 0 || source.size() == 0) throw InputError("fit: empty outlook");
    target_scaler = options.target_scaler ? *options.target_scaler : fit_scaler(target.features, options.winsor_fraction);
    source_scaler = options.source_scaler ? *options.source_scaler : fit_scaler(source.features, options.winsor_fraction);
    target_x = apply_scaler(*target_scaler, target.features);
    source_x = apply_scaler(*source_scaler, source.features);
  }
  const auto target_moments = outlook_moments(target, target_x, c);
  const auto source_moments = outlook_moments(source, source_x, c);

  std::vector<std::pair<Matrix, Matrix>> pairs;
  double weight = 0.0;
  if (options.correspondences) {
    const auto& cr = *options.correspondences;
    if (cr.target_rows.rows() != cr.source_rows.rows() ||
        cr.target_rows.rows() != static_cast<Index>(cr.labels.size())) {
      throw InputError("fit: correspondence rows and labels disagree in count");
    }
    if (cr.target_rows.cols() != target.dim() || cr.source_rows.cols() != source.dim()) {
      throw InputError("fit: correspondence dimensions do not match the outlooks");
    }
    const Matrix tx = target_scaler ? apply_scaler(*target_scaler, cr.target_rows) : cr.target_rows;
    const Matrix sx = source_scaler ? apply_scaler(*source_scaler, cr.source_rows) : cr.source_rows;
    const Index padded = std::max({target.dim(), source.dim(), options.padded_dim});
    pairs.resize(static_cast<std::size_t>(c));
    std::vector<std::vector<Vector>> tcols(static_cast<std::size_t>(c)), scols(static_cast<std::size_t>(c));
    for (std::size_t r = 0; r < cr.labels.size(); ++r) {
      const int label = cr.labels[r];
      if (label < 1 || label > c) throw InputError("fit: correspondence label out of range");
      const auto k = static_cast<std::size_t>(label - 1);
      const auto ri = static_cast<Index>(r);
      tcols[k].push_back(pad_vector(tx.row(ri).transpose() - target_moments[k].mean, padded));
      scols[k].push_back(pad_vector(sx.row(ri).transpose() - source_moments[k].mean, padded));
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      pairs[k].first.resize(padded, static_cast<Index>(tcols[k].size()));
      pairs[k].second.resize(padded, static_cast<Index>(scols[k].size()));
      for (std::size_t p = 0; p < tcols[k].size(); ++p) {
        pairs[k].first.col(static_cast<Index>(p)) = tcols[k][p];
        pairs[k].second.col(static_cast<Index>(p)) = scols[k][p];
      }
    }
    weight = cr.weight;
  }

  auto m = fit_core(target_moments, source_moments, h, options.padded_dim, pairs.empty() ? nullptr : &pairs, weight,
                    frames);
  m.target_id = target.id;
  m.source_id = source.id;
  m.target_scaler = std::move(target_scaler);
  m.source_scaler = std::move(source_scaler);
  return m;
}

Matrix apply_rigid_stage(const OutlookMapping& m, const Matrix& scaled_rows, std::span<const int> labels) {
  if (scaled_rows.rows() != static_cast<Index>(labels.size())) {
    throw InputError("apply_mapping: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(scaled_rows.rows()) + " rows");
  }
  if (scaled_rows.cols() > m.padded_dim) throw InputError("apply_mapping: rows wider than padded dimension");
  const Matrix padded = pad_columns(scaled_rows, m.padded_dim);
  Matrix out(padded.rows(), m.padded_dim);
  for (Index r = 0; r < padded.rows(); ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 1 || label > static_cast<int>(m.classes.size())) {
      throw InputError("apply_mapping: unseen label " + std::to_string(label) + " at row " + std::to_string(r + 1));
    }
    const auto& c = m.classes[static_cast<std::size_t>(label - 1)];
    out.row(r) = (padded.row(r) - c.source_mean.transpose()) * c.rotation.transpose() + c.target_mean.transpose();
  }
  return out;
}

Matrix apply_mapping(const OutlookMapping& m, const Matrix& source_rows, std::span<const int> labels) {
  if (source_rows.cols() != m.source_dim) {
    throw InputError("apply_mapping: rows have " + std::to_string(source_rows.cols()) + " features, mapping expects " +
                     std::to_string(m.source_dim));
  }
  const Matrix scaled = m.source_scaler ? apply_scaler(*m.source_scaler, source_rows) : source_rows;
  return apply_rigid_stage(m, scaled, labels);
}

Matrix to_target_space(const OutlookMapping& m, const Matrix& mapped) {
  if (mapped.cols() < m.target_dim) throw InputError("to_target_space: too few columns");
  return mapped.leftCols(m.target_dim);
}

// ---------------------------------------------------------------------------
// Multiple outlooks

const OutlookMapping& MultiOutlookModel::mapping_for(const std::string& outlook_id) const {
  for (const auto& m : mappings) {
    if (m.source_id == outlook_id) return m;
  }
  throw InputError("model has no mapping for outlook '" + outlook_id + "'");
}

bool MultiOutlookModel::contains(const std::string& outlook_id) const {
  return std::find(outlook_ids.begin(), outlook_ids.end(), outlook_id) != outlook_ids.end();
}

int MultiOutlookModel::num_classes() const {
  return mappings.empty() ? 0 : static_cast<int>(mappings.front().classes.size());
}

void MultiOutlookModel::validate() const {
  if (mappings.empty()) throw InputError("multi-outlook model: no mappings");
  if (!contains(final_id)) throw InputError("multi-outlook model: final outlook not listed");
  if (mappings.size() + 1 != outlook_ids.size()) throw InputError("multi-outlook model: mapping count mismatch");
  for (const auto& m : mappings) {
    m.validate();
    if (m.target_id != final_id) throw InputError("multi-outlook model: mapping does not target the final outlook");
    if (m.padded_dim != padded_dim) throw InputError("multi-outlook model: inconsistent padded dimension");
    if (static_cast<int>(m.classes.size()) != num_classes()) {
      throw InputError("multi-outlook model: inconsistent class count");
    }
  }
  for (const auto& id : outlook_ids) {
    const auto it = class_means.find(id);
    if (it == class_means.end() || static_cast<int>(it->second.size()) != num_classes()) {
      throw InputError("multi-outlook model: missing class means for '" + id + "'");
    }
    if (!dims.contains(id)) throw InputError("multi-outlook model: missing dimension for '" + id + "'");
  }
}

double multi_outlook_objective(const std::vector<std::vector<Matrix>>& rotations,
                               const std::vector<std::vector<Matrix>>& frames) {
  if (rotations.size() != frames.size()) throw InputError("multi_outlook_objective: outlook count mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < frames.size(); ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      if (frames[j].size() != frames[k].size()) throw InputError("multi_outlook_objective: class count mismatch");
      for (std::size_t i = 0; i < frames[j].size(); ++i) {
        total += (rotations[k][i] * frames[k][i] - rotations[j][i] * frames[j][i]).squaredNorm();
      }
    }
  }
  return total;
}

MultiOutlookModel fit_multi_outlook(std::span<const Outlook> outlooks, const std::string& final_id, Index h,
                                    const FitOptions& options) {
  if (outlooks.size() < 2) throw InputError("fit_multi_outlook: need at least 2 outlooks");
  const Outlook* final_outlook = nullptr;
  int c = options.num_classes;
  Index padded = options.padded_dim;
  MultiOutlookModel model;
  for (const auto& o : outlooks) {
    if (model.contains(o.id)) throw InputError("fit_multi_outlook: duplicate outlook id '" + o.id + "'");
    model.outlook_ids.push_back(o.id);
    model.dims[o.id] = o.dim();
    if (o.id == final_id) final_outlook = &o;
    c = std::max(c, o.num_classes());
    padded = std::max(padded, o.dim());
  }
  if (!final_outlook) throw InputError("fit_multi_outlook: unknown final outlook '" + final_id + "'");
  model.final_id = final_id;
  model.h = h;
  model.padded_dim = padded;

  FitOptions pair_options = options;
  pair_options.padded_dim = padded;
  pair_options.num_classes = c;
  pair_options.correspondences.reset();
  if (const auto it = options.outlook_scalers.find(final_id); it != options.outlook_scalers.end()) {
    pair_options.target_scaler = it->second;
  } else {
    pair_options.target_scaler.reset();
  }

  std::vector<std::vector<Matrix>> rotations;
  std::vector<std::vector<Matrix>> frames;
  for (const auto& o : outlooks) {
    if (o.id == final_id) continue;
    if (const auto it = options.outlook_scalers.find(o.id); it != options.outlook_scalers.end()) {
      pair_options.source_scaler = it->second;
    } else {
      pair_options.source_scaler.reset();
    }
    FitFrames fit_frames;
    auto mapping = fit_two_outlooks(*final_outlook, o, h, pair_options, &fit_frames);
    if (frames.empty()) {
      frames.push_back(fit_frames.target);
      rotations.emplace_back(static_cast<std::size_t>(c), Matrix::Identity(padded, padded));
      model.scalers[final_id] = mapping.target_scaler;
      auto& means = model.class_means[final_id];
      for (const auto& cm : mapping.classes) means.push_back(cm.target_mean);
    }
    frames.push_back(fit_frames.source);
    auto& rot = rotations.emplace_back();
    auto& means = model.class_means[o.id];
    for (const auto& cm : mapping.classes) {
      rot.push_back(cm.rotation);
      means.push_back(cm.source_mean);
    }
    model.scalers[o.id] = mapping.source_scaler;
    model.mappings.push_back(std::move(mapping));
  }
  model.alignment_objective = multi_outlook_objective(rotations, frames);
  return model;
}

Matrix switch_final_outlook(const MultiOutlookModel& model, const Matrix& rows_in_final, std::span<const int> labels,
                            const std::string& new_final_id) {
  if (!model.contains(new_final_id)) throw InputError("switch_final_outlook: unknown outlook '" + new_final_id + "'");
  if (rows_in_final.rows() != static_cast<Index>(labels.size())) {
    throw InputError("switch_final_outlook: label count does not match row count");
  }
  if (rows_in_final.cols() > model.padded_dim) throw InputError("switch_final_outlook: rows wider than padded space");
  const Matrix rows = pad_columns(rows_in_final, model.padded_dim);
  if (new_final_id == model.final_id) return rows;
  const auto& mapping = model.mapping_for(new_final_id);
  Matrix out(rows.rows(), rows.cols());
  for (Index r = 0; r < rows.rows(); ++r) {
    const int label = labels[static_cast<std::size_t>(r)];
    if (label < 1 || label > static_cast<int>(mapping.classes.size())) {
      throw InputError("switch_final_outlook: unseen label " + std::to_string(label));
    }
    const auto& c = mapping.classes[static_cast<std::size_t>(label - 1)];
    // Inverse of y = (x - mu_k) R^T + mu_s.
    out.row(r) = (rows.row(r) - c.target_mean.transpose()) * c.rotation + c.source_mean.transpose();
  }
  return out;
}

MultiOutlookModel rebase_model(const MultiOutlookModel& model, const std::string& new_final_id) {
  if (!model.contains(new_final_id)) throw InputError("rebase_model: unknown outlook '" + new_final_id + "'");
  if (new_final_id == model.final_id) return model;
  const auto& pivot = model.mapping_for(new_final_id);
  MultiOutlookModel out = model;
  out.final_id = new_final_id;
  out.mappings.clear();
  for (const auto& id : model.outlook_ids) {
    if (id == new_final_id) continue;
    OutlookMapping m;
    m.source_id = id;
    m.target_id = new_final_id;
    m.h = model.h;
    m.source_dim = model.dims.at(id);
    m.target_dim = model.dims.at(new_final_id);
    m.padded_dim = model.padded_dim;
    m.source_scaler = model.scalers.at(id);
    m.target_scaler = model.scalers.at(new_final_id);
    for (std::size_t i = 0; i < pivot.classes.size(); ++i) {
      const auto& p = pivot.classes[i];
      ClassMapping cm;
      cm.class_index = p.class_index;
      cm.source_mean = model.class_means.at(id)[i];
      cm.target_mean = model.class_means.at(new_final_id)[i];
      if (id == model.final_id) {
        cm.rotation = p.rotation.transpose();
        cm.objective = p.objective;
      } else {
        const auto& own = model.mapping_for(id).classes[i];
        cm.rotation = p.rotation.transpose() * own.rotation;
        // Triangle-inequality bound on the composed misfit.
        cm.objective = p.objective + own.objective;
        cm.near_degenerate = own.near_degenerate;
        cm.rank_deficient = own.rank_deficient;
      }
      cm.near_degenerate = cm.near_degenerate || p.near_degenerate;
      cm.rank_deficient = cm.rank_deficient || p.rank_deficient;
      m.classes.push_back(std::move(cm));
    }
    out.mappings.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(nlohmann::json& j, const OutlookMapping& m) {
  auto classes = nlohmann::json::array();
  for (const auto& c : m.classes) {
    classes.push_back({{"class", c.class_index},
                       {"rotation", detail::matrix_json(c.rotation)},
                       {"source_mean", detail::vector_json(c.source_mean)},
                       {"target_mean", detail::vector_json(c.target_mean)},
                       {"objective", c.objective},
                       {"near_degenerate", c.near_degenerate},
                       {"rank_deficient", c.rank_deficient}});
  }
  j = {{"source_id", m.source_id},
       {"target_id", m.target_id},
       {"h", m.h},
       {"source_dim", m.source_dim},
       {"target_dim", m.target_dim},
       {"padded_dim", m.padded_dim},
       {"classes", std::move(classes)},
       {"source_scaler", nullptr},
       {"target_scaler", nullptr}};
  if (m.source_scaler) j["source_scaler"] = *m.source_scaler;
  if (m.target_scaler) j["target_scaler"] = *m.target_scaler;
}

void from_json(const nlohmann::json& j, OutlookMapping& m) {
  try {
    m = {};
    m.source_id = j.at("source_id").get<std::string>();
    m.target_id = j.at("target_id").get<std::string>();
    m.h = j.at("h").get<Index>();
    m.padded_dim = j.at("padded_dim").get<Index>();
    m.source_dim = j.value("source_dim", m.padded_dim);
    m.target_dim = j.value("target_dim", m.padded_dim);
    for (const auto& c : j.at("classes")) {
      ClassMapping cm;
      cm.class_index = c.at("class").get<int>();
      cm.rotation = detail::json_matrix(c.at("rotation"), "rotation");
      cm.source_mean = detail::json_vector(c.at("source_mean"), "source_mean");
      cm.target_mean = detail::json_vector(c.at("target_mean"), "target_mean");
      cm.objective = c.value("objective", 0.0);
      cm.near_degenerate = c.value("near_degenerate", false);
      cm.rank_deficient = c.value("rank_deficient", false);
      m.classes.push_back(std::move(cm));
    }
    if (j.contains("source_scaler") && !j["source_scaler"].is_null()) m.source_scaler = j["source_scaler"].get<ScalerParams>();
    if (j.contains("target_scaler") && !j["target_scaler"].is_null()) m.target_scaler = j["target_scaler"].get<ScalerParams>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mapping: malformed file: ") + e.what());
  }
  m.validate();
}

void to_json(nlohmann::json& j, const MultiOutlookModel& m) {
  auto means = nlohmann::json::object();
  for (const auto& [id, list] : m.class_means) {
    auto rows = nlohmann::json::array();
    for (const auto& v : list) rows.push_back(detail::vector_json(v));
    means[id] = std::move(rows);
  }
  auto dims = nlohmann::json::object();
  for (const auto& [id, d] : m.dims) dims[id] = d;
  auto scalers = nlohmann::json::object();
  for (const auto& [id, s] : m.scalers) scalers[id] = s ? nlohmann::json(*s) : nlohmann::json(nullptr);
  j = {{"final_id", m.final_id},         {"h", m.h},
       {"padded_dim", m.padded_dim},     {"outlooks", m.outlook_ids},
       {"dims", std::move(dims)},        {"scalers", std::move(scalers)},
       {"class_means", std::move(means)}, {"alignment_objective", m.alignment_objective},
       {"mappings", m.mappings}};
}

void from_json(const nlohmann::json& j, MultiOutlookModel& m) {
  try {
    m = {};
    m.final_id = j.at("final_id").get<std::string>();
    m.h = j.at("h").get<Index>();
    m.padded_dim = j.at("padded_dim").get<Index>();
    m.outlook_ids = j.at("outlooks").get<std::vector<std::string>>();
    for (const auto& [id, d] : j.at("dims").items()) m.dims[id] = d.get<Index>();
    for (const auto& [id, s] : j.at("scalers").items()) {
      m.scalers[id] = s.is_null() ? std::nullopt : std::optional<ScalerParams>(s.get<ScalerParams>());
    }
    for (const auto& [id, rows] : j.at("class_means").items()) {
      auto& list = m.class_means[id];
      for (const auto& v : rows) list.push_back(detail::json_vector(v, "class mean"));
    }
    m.alignment_objective = j.value("alignment_objective", 0.0);
    for (const auto& mj : j.at("mappings")) m.mappings.push_back(mj.get<OutlookMapping>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("multi-outlook model: malformed file: ") + e.what());
  }
  m.validate();
}

MappingModel parse_mapping(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mapping: malformed file: ") + e.what());
  }
  if (!j.is_object()) throw InputError("mapping: malformed file: expected an object");
  if (j.contains("mappings")) return j.get<MultiOutlookModel>();
  return j.get<OutlookMapping>();
}

MappingModel load_mapping(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mapping(buffer.str());
}

void save_mapping(const MappingModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  std::visit([&](const auto& m) { j = m; }, model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw InputError("write failed: " + path.string());
}

}  // namespace outlook
