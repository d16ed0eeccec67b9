#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mer/dataset.hpp"
#include "mer/estimator.hpp"
#include "mer/matrix.hpp"

namespace mer {

struct FeatureRanking {
  // 1 = retained to the end; eliminated features get distinct ranks 2.. in
  // reverse elimination order (last removed -> 2).
  std::vector<std::size_t> rank;
  std::vector<std::pair<std::size_t, double>> elimination_trace;  // (index, importance)
};

struct SizeScore {
  std::vector<double> fold_scores;
  double mean = 0.0;
};

struct SelectedFeatureSet {
  std::vector<std::size_t> selected_indices;  // sorted ascending
  std::vector<std::string> selected_names;
  std::map<std::size_t, SizeScore> scores_by_size;
  std::size_t chosen_size = 0;
  EstimatorSpec estimator;
  std::string target;  // "valence" or "arousal"
  std::uint64_t master_seed = 0;
};

// Called once per RFE iteration with the surviving feature indices (ascending)
// and the model fitted on them, before any elimination happens.
using RfeObserver =
    std::function<void(const std::vector<std::size_t>&, const FittedEstimator&)>;

// Recursive feature elimination: fit, rank by importance, drop the `step`
// least-important features (ties remove the higher index first), repeat until
// n_target survive. The final step shrinks to land exactly on n_target.
FeatureRanking rfe(const Matrix& X, const std::vector<double>& y, const EstimatorSpec& spec,
                   std::size_t n_target, std::size_t step, std::uint64_t seed,
                   const RfeObserver& observer = nullptr, std::size_t threads = 1);

// RFE wrapped in k-fold CV: each fold runs its own elimination on the training
// part, scoring every visited subset size on the held-out part with R^2. The
// chosen size maximizes the mean score (ties -> smaller); the final subset
// comes from a full-data RFE down to that size.
SelectedFeatureSet rfecv(const Matrix& X, const std::vector<double>& y,
                         const EstimatorSpec& spec, std::size_t k, std::size_t step,
                         std::uint64_t seed, std::size_t threads = 1);

// Column-subset of a dataset; names are verified against the artifact.
Dataset apply_selection(const Dataset& dataset, const SelectedFeatureSet& sfs);

// (d_original - d_selected) / d_original.
double compute_reduction_rate(std::size_t d_original, std::size_t d_selected);

}  // namespace mer
