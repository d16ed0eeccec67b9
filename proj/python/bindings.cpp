#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mer/dataset.hpp"
#include "mer/emotion.hpp"
#include "mer/evaluation.hpp"
#include "mer/selection.hpp"
#include "mer/serialize.hpp"

namespace py = pybind11;
using namespace mer;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols) throw std::invalid_argument("ragged row matrix");
    for (std::size_t j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> matrix_to_rows(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows);
  for (std::size_t i = 0; i < m.rows; ++i) out[i] = m.row(i);
  return out;
}

EstimatorSpec make_spec(const std::string& kind, const SvrParams& svr,
                        const ForestParams& forest) {
  EstimatorSpec spec;
  spec.kind = estimator_kind_from(kind);
  spec.svr = svr;
  spec.forest = forest;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feature selection and regression benchmarking core";

  py::class_<Matrix>(m, "Matrix")
      .def(py::init(&matrix_from_rows))
      .def_readonly("rows", &Matrix::rows)
      .def_readonly("cols", &Matrix::cols)
      .def("to_rows", &matrix_to_rows);

  py::class_<Dataset>(m, "Dataset")
      .def_readonly("song_ids", &Dataset::song_ids)
      .def_readonly("feature_names", &Dataset::feature_names)
      .def_readonly("X", &Dataset::X)
      .def_readonly("valence", &Dataset::valence)
      .def_readonly("arousal", &Dataset::arousal)
      .def_property_readonly("n_samples", &Dataset::n_samples)
      .def_property_readonly("n_features", &Dataset::n_features);

  py::class_<ColumnStats>(m, "ColumnStats")
      .def_readonly("means", &ColumnStats::means)
      .def_readonly("stds", &ColumnStats::stds)
      .def_readonly("constant_mask", &ColumnStats::constant_mask);

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def(py::init<>())
      .def_readwrite("n_samples", &SyntheticSpec::n_samples)
      .def_readwrite("n_informative", &SyntheticSpec::n_informative)
      .def_readwrite("n_noise", &SyntheticSpec::n_noise)
      .def_readwrite("noise_sigma", &SyntheticSpec::noise_sigma);

  m.def("load_canonical", [](const std::filesystem::path& p) { return load_canonical(p); });
  m.def("save_canonical", &save_canonical);
  m.def("zscore_normalize", &zscore_normalize);
  m.def("split", &split, py::arg("dataset"), py::arg("ratio"), py::arg("seed"));
  m.def("generate_synthetic", &generate_synthetic, py::arg("spec"), py::arg("seed"));
  m.def("group_features_by_family",
        [](const std::vector<std::string>& names) { return group_features_by_family(names); });

  py::class_<SvrParams>(m, "SvrParams")
      .def(py::init<>())
      .def_readwrite("C", &SvrParams::C)
      .def_readwrite("epsilon", &SvrParams::epsilon)
      .def_readwrite("gamma", &SvrParams::gamma)
      .def_readwrite("tol", &SvrParams::tol)
      .def_property(
          "kernel", [](const SvrParams& p) { return p.kernel == Kernel::Rbf ? "rbf" : "linear"; },
          [](SvrParams& p, const std::string& k) {
            p.kernel = (k == "linear") ? Kernel::Linear : Kernel::Rbf;
          });

  py::class_<SvrModel>(m, "SvrModel")
      .def_readonly("dual_coeffs", &SvrModel::dual_coeffs)
      .def_readonly("bias", &SvrModel::bias)
      .def_readonly("converged", &SvrModel::converged)
      .def_property_readonly("n_support",
                             [](const SvrModel& m_) { return m_.dual_coeffs.size(); });

  m.def("rbf_kernel", &rbf_kernel);
  m.def("train_svr", &train_svr, py::arg("X"), py::arg("y"), py::arg("params"),
        py::arg("seed") = 0);
  m.def("predict_svr", &predict_svr);
  m.def("kkt_residual", &kkt_residual);

  py::class_<ForestParams>(m, "ForestParams")
      .def(py::init<>())
      .def_readwrite("n_trees", &ForestParams::n_trees)
      .def_readwrite("min_samples_split", &ForestParams::min_samples_split)
      .def_readwrite("bootstrap", &ForestParams::bootstrap);

  py::class_<ForestModel>(m, "ForestModel")
      .def_property_readonly("n_trees",
                             [](const ForestModel& m_) { return m_.trees.size(); });

  py::enum_<ImportanceMode>(m, "ImportanceMode")
      .value("impurity", ImportanceMode::Impurity)
      .value("oob_mae", ImportanceMode::OobMaePermutation);

  m.def("train_forest", &train_forest, py::arg("X"), py::arg("y"), py::arg("params"),
        py::arg("seed"), py::arg("threads") = 1);
  m.def("predict_forest", &predict_forest);
  m.def("forest_feature_importance", &forest_feature_importance, py::arg("model"), py::arg("X"),
        py::arg("y"), py::arg("mode") = ImportanceMode::Impurity, py::arg("seed") = 0);

  py::class_<SelectedFeatureSet>(m, "SelectedFeatureSet")
      .def_readonly("selected_indices", &SelectedFeatureSet::selected_indices)
      .def_readonly("selected_names", &SelectedFeatureSet::selected_names)
      .def_readonly("chosen_size", &SelectedFeatureSet::chosen_size)
      .def_readonly("target", &SelectedFeatureSet::target);

  m.def(
      "rfe",
      [](const Matrix& X, const std::vector<double>& y, const std::string& kind,
         const SvrParams& svr, const ForestParams& forest, std::size_t n_target,
         std::size_t step, std::uint64_t seed) {
        const auto ranking = rfe(X, y, make_spec(kind, svr, forest), n_target, step, seed);
        return ranking.rank;
      },
      py::arg("X"), py::arg("y"), py::arg("estimator"), py::arg("svr_params"),
      py::arg("forest_params"), py::arg("n_target"), py::arg("step") = 1, py::arg("seed") = 0);

  m.def(
      "rfecv",
      [](const Matrix& X, const std::vector<double>& y, const std::string& kind,
         const SvrParams& svr, const ForestParams& forest, std::size_t k, std::size_t step,
         std::uint64_t seed) {
        return rfecv(X, y, make_spec(kind, svr, forest), k, step, seed);
      },
      py::arg("X"), py::arg("y"), py::arg("estimator"), py::arg("svr_params"),
      py::arg("forest_params"), py::arg("k") = 10, py::arg("step") = 1, py::arg("seed") = 0);

  m.def("compute_reduction_rate", &compute_reduction_rate);

  py::class_<CvReport>(m, "CvReport")
      .def_readonly("fold_scores", &CvReport::fold_scores)
      .def_readonly("fold_losses", &CvReport::fold_losses)
      .def_readonly("mean_score", &CvReport::mean_score)
      .def_readonly("std_score", &CvReport::std_score)
      .def_readonly("cv_loss", &CvReport::cv_loss);

  m.def(
      "cross_validate",
      [](const Matrix& X, const std::vector<double>& y, const std::string& kind,
         const SvrParams& svr, const ForestParams& forest, std::size_t k, std::uint64_t seed) {
        return cross_validate(X, y, make_spec(kind, svr, forest), k, seed);
      },
      py::arg("X"), py::arg("y"), py::arg("estimator"), py::arg("svr_params"),
      py::arg("forest_params"), py::arg("k") = 10, py::arg("seed") = 0);

  m.def("r2_score", &r2_score);
  m.def("mae", py::overload_cast<const std::vector<double>&, double>(&mae));
  m.def("fold_std", &fold_std);

  py::class_<VaPoint>(m, "VaPoint")
      .def(py::init([](double v, double a) { return VaPoint{v, a}; }), py::arg("valence"),
           py::arg("arousal"))
      .def_readwrite("valence", &VaPoint::valence)
      .def_readwrite("arousal", &VaPoint::arousal);

  m.def("quadrant_of", [](const VaPoint& p) { return to_string(quadrant_of(p)); });
  m.def("hevner_cluster_of", [](const VaPoint& p) { return hevner_cluster_of(p); });
}
