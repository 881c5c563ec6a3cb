#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "outlook/eval.hpp"
#include "outlook/momap.hpp"
#include "outlook/moments.hpp"
#include "outlook/preprocess.hpp"
#include "outlook/procrustes.hpp"
#include "outlook/synth.hpp"

namespace py = pybind11;
using namespace outlook;

namespace {

Outlook make_outlook(std::string id, const Matrix& features, std::vector<int> labels) {
  Outlook o{std::move(id), features, std::move(labels)};
  o.validate();
  return o;
}

FitOptions make_options(bool scale, double winsor_fraction) {
  FitOptions opts;
  opts.scale = scale;
  opts.winsor_fraction = winsor_fraction;
  return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Outlook mapping core (C++)";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<ScalerParams>(m, "ScalerParams")
      .def_readonly("lower_clip", &ScalerParams::lower_clip)
      .def_readonly("upper_clip", &ScalerParams::upper_clip)
      .def_readonly("min_val", &ScalerParams::min_val)
      .def_readonly("range", &ScalerParams::range);

  m.def("fit_scaler", &fit_scaler, py::arg("features"), py::arg("winsor_fraction") = kDefaultWinsorFraction);
  m.def("apply_scaler", &apply_scaler, py::arg("params"), py::arg("features"));

  m.def(
      "utilization_matrix",
      [](const Matrix& covariance, Index h) {
        const auto u = utilization_matrix(covariance, h);
        return py::make_tuple(u.directions, u.eigenvalues);
      },
      py::arg("covariance"), py::arg("h"),
      "Top-h eigenvectors (columns) and their eigenvalues, descending.");

  m.def(
      "match_by_rotation",
      [](const Matrix& d1, const Matrix& d2) {
        const auto sol = match_by_rotation(d1, d2);
        return py::make_tuple(sol.rotation, sol.objective);
      },
      py::arg("d1"), py::arg("d2"), "Orthogonal R minimizing ||R d2 - d1||_F; returns (R, objective).");

  py::class_<OutlookMapping>(m, "OutlookMapping")
      .def_readonly("source_id", &OutlookMapping::source_id)
      .def_readonly("target_id", &OutlookMapping::target_id)
      .def_readonly("h", &OutlookMapping::h)
      .def_readonly("source_dim", &OutlookMapping::source_dim)
      .def_readonly("target_dim", &OutlookMapping::target_dim)
      .def_readonly("padded_dim", &OutlookMapping::padded_dim)
      .def_property_readonly("objectives",
                             [](const OutlookMapping& self) {
                               std::vector<double> out;
                               for (const auto& c : self.classes) out.push_back(c.objective);
                               return out;
                             })
      .def("rotation", [](const OutlookMapping& self, int c) { return self.for_class(c).rotation; })
      .def(
          "apply",
          [](const OutlookMapping& self, const Matrix& rows, const std::vector<int>& labels, bool padded) {
            Matrix out = apply_mapping(self, rows, labels);
            return padded ? out : to_target_space(self, out);
          },
          py::arg("rows"), py::arg("labels"), py::arg("padded") = false)
      .def("to_json", [](const OutlookMapping& self) { return nlohmann::json(self).dump(2); });

  py::class_<MultiOutlookModel>(m, "MultiOutlookModel")
      .def_readonly("final_id", &MultiOutlookModel::final_id)
      .def_readonly("h", &MultiOutlookModel::h)
      .def_readonly("padded_dim", &MultiOutlookModel::padded_dim)
      .def_readonly("outlook_ids", &MultiOutlookModel::outlook_ids)
      .def_readonly("alignment_objective", &MultiOutlookModel::alignment_objective)
      .def(
          "mapping", [](const MultiOutlookModel& self, const std::string& id) { return self.mapping_for(id); },
          py::arg("outlook_id"))
      .def(
          "switch_final",
          [](const MultiOutlookModel& self, const Matrix& rows, const std::vector<int>& labels, const std::string& id) {
            return switch_final_outlook(self, rows, labels, id);
          },
          py::arg("rows_in_final"), py::arg("labels"), py::arg("new_final_id"))
      .def("rebase", &rebase_model, py::arg("new_final_id"))
      .def("to_json", [](const MultiOutlookModel& self) { return nlohmann::json(self).dump(2); });

  m.def(
      "fit_two_outlooks",
      [](const Matrix& target_x, std::vector<int> target_y, const Matrix& source_x, std::vector<int> source_y, Index h,
         bool scale, double winsor_fraction, const std::string& target_id, const std::string& source_id) {
        const auto target = make_outlook(target_id, target_x, std::move(target_y));
        const auto source = make_outlook(source_id, source_x, std::move(source_y));
        return fit_two_outlooks(target, source, h, make_options(scale, winsor_fraction));
      },
      py::arg("target_x"), py::arg("target_y"), py::arg("source_x"), py::arg("source_y"), py::arg("h"),
      py::arg("scale") = true, py::arg("winsor_fraction") = kDefaultWinsorFraction, py::arg("target_id") = "target",
      py::arg("source_id") = "source");

  m.def(
      "fit_multi_outlook",
      [](const std::vector<std::string>& ids, const std::vector<Matrix>& features,
         const std::vector<std::vector<int>>& labels, const std::string& final_id, Index h, bool scale,
         double winsor_fraction) {
        if (ids.size() != features.size() || ids.size() != labels.size()) {
          throw InputError("fit_multi_outlook: ids, features and labels must have equal length");
        }
        std::vector<Outlook> outlooks;
        for (std::size_t i = 0; i < ids.size(); ++i) outlooks.push_back(make_outlook(ids[i], features[i], labels[i]));
        return fit_multi_outlook(outlooks, final_id, h, make_options(scale, winsor_fraction));
      },
      py::arg("ids"), py::arg("features"), py::arg("labels"), py::arg("final_id"), py::arg("h"),
      py::arg("scale") = true, py::arg("winsor_fraction") = kDefaultWinsorFraction);

  m.def(
      "load_mapping",
      [](const std::string& text) -> py::object {
        auto model = parse_mapping(text);
        if (auto* two = std::get_if<OutlookMapping>(&model)) return py::cast(std::move(*two));
        return py::cast(std::get<MultiOutlookModel>(std::move(model)));
      },
      py::arg("json_text"));

  m.def(
      "balanced_error_rate",
      [](const std::vector<int>& predicted, const std::vector<int>& actual, int num_classes) {
        const auto r = balanced_error_rate(predicted, actual, num_classes);
        return py::make_tuple(r.ber, r.per_class_error_rate, r.confusion);
      },
      py::arg("predicted"), py::arg("actual"), py::arg("num_classes"),
      "Returns (ber, per-class error rates, confusion matrix).");

  m.def(
      "knn_classify",
      [](const Matrix& train_x, const std::vector<int>& train_y, const Matrix& test_x, int k, unsigned threads) {
        return knn_classify(train_x, train_y, test_x, k, threads);
      },
      py::arg("train_x"), py::arg("train_y"), py::arg("test_x"), py::arg("k") = 5,
        py::arg("threads") = 1);

  m.def(
      "sample_mixture",
      [](const std::string& spec_json, const std::vector<int>& counts, std::uint64_t seed) {
        const auto spec = nlohmann::json::parse(spec_json).get<MixtureSpec>();
        auto o = sample_mixture(spec, counts, seed);
        return py::make_tuple(std::move(o.features), std::move(o.labels));
      },
      py::arg("spec_json"), py::arg("counts"), py::arg("seed"), "Returns (features, labels).");
}
