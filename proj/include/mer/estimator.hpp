#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>

#include "mer/forest.hpp"
#include "mer/matrix.hpp"
#include "mer/svr.hpp"

namespace mer {

enum class EstimatorKind { Svr, Forest };

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Forest;
  SvrParams svr;
  ForestParams forest;
  ImportanceMode forest_importance = ImportanceMode::Impurity;
  std::size_t svr_importance_folds = 3;  // folds for RBF permutation importance
};

struct FittedEstimator {
  std::variant<SvrModel, ForestModel> model;

  std::vector<double> predict(const Matrix& X) const {
    if (auto* svr = std::get_if<SvrModel>(&model)) return predict_svr(*svr, X);
    return predict_forest(std::get<ForestModel>(model), X);
  }
};

inline FittedEstimator fit_estimator(const EstimatorSpec& spec, const Matrix& X,
                                     const std::vector<double>& y, std::uint64_t seed,
                                     std::size_t threads = 1) {
  FittedEstimator out;
  if (spec.kind == EstimatorKind::Svr)
    out.model = train_svr(X, y, spec.svr, seed);
  else
    out.model = train_forest(X, y, spec.forest, seed, threads);
  return out;
}

// Importance of each feature for ranking inside RFE. The forest reuses the
// fitted model; a linear-kernel SVR uses |w_j|; an RBF SVR falls back to
// CV permutation importance (which refits internally).
inline std::vector<double> estimator_importance(const EstimatorSpec& spec,
                                                const FittedEstimator& fitted, const Matrix& X,
                                                const std::vector<double>& y,
                                                std::uint64_t seed) {
  if (spec.kind == EstimatorKind::Forest) {
    return forest_feature_importance(std::get<ForestModel>(fitted.model), X, y,
                                     spec.forest_importance, seed);
  }
  if (spec.svr.kernel == Kernel::Linear)
    return svr_linear_weights(std::get<SvrModel>(fitted.model));
  return svr_feature_importance(spec.svr, X, y, spec.svr_importance_folds, seed);
}

inline std::string to_string(EstimatorKind kind) {
  return kind == EstimatorKind::Svr ? "svr" : "forest";
}

inline EstimatorKind estimator_kind_from(const std::string& s) {
  if (s == "svr") return EstimatorKind::Svr;
  if (s == "forest") return EstimatorKind::Forest;
  throw std::invalid_argument("unknown estimator '" + s + "'");
}

}  // namespace mer
