#include "outlook/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "json_util.hpp"
#include "outlook/rng.hpp"

namespace outlook {

using detail::json_matrix;
using detail::json_vector;
using detail::matrix_json;

namespace {

constexpr double kPsdTolerance = 1e-10;

/// Symmetric square root factor L with L L^T = cov. Works for singular PSD
/// matrices, unlike Cholesky.
Matrix psd_factor(const Matrix& cov, int class_index) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("covariance of class " + std::to_string(class_index) + ": eigendecomposition failed");
  }
  Vector values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if (values.minCoeff() < -kPsdTolerance * scale) {
    throw NumericalError("covariance of class " + std::to_string(class_index) + " is not positive semidefinite");
  }
  values = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * values.asDiagonal();
}

}  // namespace

void MixtureSpec::validate() const {
  if (dim < 1) throw InputError("mixture spec: dimension must be positive");
  if (components.empty()) throw InputError("mixture spec: no components");
  double total = 0.0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    const std::string name = "mixture component " + std::to_string(i + 1);
    if (!(c.weight > 0.0)) throw InputError(name + ": weight must be positive");
    total += c.weight;
    if (c.mean.size() != dim) throw InputError(name + ": mean has wrong length");
    if (c.cov.rows() != dim || c.cov.cols() != dim) throw InputError(name + ": covariance has wrong shape");
    if (!c.mean.allFinite() || !c.cov.allFinite()) throw InputError(name + ": non-finite entries");
    const double asym = (c.cov - c.cov.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * std::max(1.0, c.cov.cwiseAbs().maxCoeff())) {
      throw InputError(name + ": covariance is not symmetric");
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw InputError("mixture spec: weights must sum to 1");
}

Outlook sample_mixture(const MixtureSpec& spec, std::span<const int> n_per_class, std::uint64_t seed,
                       std::string id) {
  spec.validate();
  if (static_cast<int>(n_per_class.size()) != spec.num_classes()) {
    throw InputError("sample_mixture: need one count per class");
  }
  Index total = 0;
  for (int n : n_per_class) {
    if (n < 0) throw InputError("sample_mixture: negative class count");
    total += n;
  }

  Outlook o;
  o.id = std::move(id);
  o.features.resize(total, spec.dim);
  o.labels.reserve(static_cast<std::size_t>(total));
  Index row = 0;
  for (int i = 0; i < spec.num_classes(); ++i) {
    const auto& comp = spec.components[static_cast<std::size_t>(i)];
    const Matrix factor = psd_factor(comp.cov, i + 1);
    Vector z(spec.dim);
    for (int r = 0; r < n_per_class[static_cast<std::size_t>(i)]; ++r, ++row) {
      CounterRng rng{seed, static_cast<std::uint64_t>(i + 1), static_cast<std::uint64_t>(r)};
      for (Index k = 0; k < spec.dim; ++k) z(k) = rng.normal();
      o.features.row(row) = (comp.mean + factor * z).transpose();
      o.labels.push_back(i + 1);
    }
  }
  return o;
}

Outlook transform_outlook(const Outlook& o, const GroundTruthTransform& t) {
  if (t.rotation.rows() != o.dim() || t.rotation.cols() != o.dim()) {
    throw InputError("transform_outlook: rotation is " + std::to_string(t.rotation.rows()) + "x" +
                     std::to_string(t.rotation.cols()) + " but outlook has dimension " +
                     std::to_string(o.dim()));
  }
  Outlook out = o;
  out.features = o.features * t.rotation.transpose();
  for (Index r = 0; r < out.size(); ++r) {
    const auto label = static_cast<std::size_t>(o.labels[static_cast<std::size_t>(r)]);
    if (label > t.translations.size()) {
      throw InputError("transform_outlook: no translation for class " + std::to_string(label));
    }
    const Vector& shift = t.translations[label - 1];
    if (shift.size() != o.dim()) throw InputError("transform_outlook: translation has wrong length");
    out.features.row(r) += shift.transpose();
  }
  return out;
}

GroundTruthTransform inverse_transform(const GroundTruthTransform& t) {
  // y = x Q^T + s  =>  x = y Q - s Q = y (Q^T)^T + (-Q^T s)^T
  GroundTruthTransform inv;
  inv.rotation = t.rotation.transpose();
  for (const auto& s : t.translations) inv.translations.push_back(-(t.rotation.transpose() * s));
  return inv;
}

MixtureSpec transform_spec(const MixtureSpec& spec, const GroundTruthTransform& t) {
  spec.validate();
  if (t.rotation.rows() != spec.dim || t.rotation.cols() != spec.dim) {
    throw InputError("transform_spec: dimension mismatch");
  }
  if (static_cast<int>(t.translations.size()) < spec.num_classes()) {
    throw InputError("transform_spec: missing class translations");
  }
  MixtureSpec out = spec;
  for (std::size_t i = 0; i < out.components.size(); ++i) {
    auto& c = out.components[i];
    c.mean = t.rotation * spec.components[i].mean + t.translations[i];
    c.cov = t.rotation * spec.components[i].cov * t.rotation.transpose();
    c.cov = (0.5 * (c.cov + c.cov.transpose())).eval();
  }
  return out;
}

MixtureSpec scale_spec_to_unit_second_moment(const MixtureSpec& spec) {
  spec.validate();
  double largest = 0.0;
  for (const auto& c : spec.components) {
    const Matrix second = c.mean * c.mean.transpose() + c.cov;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(second, Eigen::EigenvaluesOnly);
    largest = std::max(largest, eig.eigenvalues().cwiseAbs().maxCoeff());
  }
  if (largest == 0.0) return spec;
  const double s = 1.0 / std::sqrt(largest);
  MixtureSpec out = spec;
  for (auto& c : out.components) {
    c.mean *= s;
    c.cov *= s * s;
  }
  return out;
}

Matrix random_orthogonal(Index dim, std::uint64_t seed) {
  CounterRng rng{seed, 0x0127ULL};
  Matrix g(dim, dim);
  for (Index j = 0; j < dim; ++j)
    for (Index i = 0; i < dim; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  return q;
}

GroundTruthTransform identity_transform(Index dim, int num_classes) {
  GroundTruthTransform t;
  t.rotation = Matrix::Identity(dim, dim);
  t.translations.assign(static_cast<std::size_t>(num_classes), Vector::Zero(dim));
  return t;
}

void to_json(nlohmann::json& j, const MixtureSpec& spec) {
  j = nlohmann::json::object();
  j["d"] = spec.dim;
  auto comps = nlohmann::json::array();
  for (const auto& c : spec.components) {
    comps.push_back({{"weight", c.weight},
                     {"mean", std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size())},
                     {"cov", matrix_json(c.cov)}});
  }
  j["components"] = std::move(comps);
}

void from_json(const nlohmann::json& j, MixtureSpec& spec) {
  try {
    spec.dim = j.at("d").get<Index>();
    spec.components.clear();
    for (const auto& c : j.at("components")) {
      MixtureComponent comp;
      comp.weight = c.at("weight").get<double>();
      comp.mean = json_vector(c.at("mean"), "mixture mean");
      comp.cov = json_matrix(c.at("cov"), "mixture covariance");
      spec.components.push_back(std::move(comp));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("mixture spec: ") + e.what());
  }
  spec.validate();
}

void to_json(nlohmann::json& j, const GroundTruthTransform& t) {
  auto shifts = nlohmann::json::array();
  for (const auto& s : t.translations) shifts.push_back(std::vector<double>(s.data(), s.data() + s.size()));
  j = {{"rotation", matrix_json(t.rotation)}, {"translations", std::move(shifts)}};
}

void from_json(const nlohmann::json& j, GroundTruthTransform& t) {
  try {
    t.rotation = json_matrix(j.at("rotation"), "transform rotation");
    t.translations.clear();
    for (const auto& s : j.at("translations")) t.translations.push_back(json_vector(s, "transform translation"));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("transform: ") + e.what());
  }
  const Index d = t.rotation.rows();
  if (t.rotation.cols() != d) throw InputError("transform: rotation must be square");
  if ((t.rotation.transpose() * t.rotation - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
    throw InputError("transform: rotation is not orthogonal");
  }
  for (const auto& s : t.translations) {
    if (s.size() != d) throw InputError("transform: translation has wrong length");
  }
}

}  // namespace outlook
