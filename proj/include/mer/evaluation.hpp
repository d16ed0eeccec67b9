#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mer/dataset.hpp"
#include "mer/estimator.hpp"
#include "mer/folds.hpp"
#include "mer/metrics.hpp"
#include "mer/selection.hpp"

namespace mer {

struct CvReport {
  std::vector<double> fold_scores;   // R^2 per fold
  std::vector<double> fold_losses;   // mean squared error per fold
  std::vector<double> fold_elapsed;  // seconds
  double mean_score = 0.0;
  double std_score = 0.0;
  double cv_loss = 0.0;  // mean fold loss
  std::uint64_t plan_seed = 0;
};

CvReport cross_validate(const Matrix& X, const std::vector<double>& y,
                        const EstimatorSpec& spec, std::size_t k, std::uint64_t seed,
                        std::size_t threads = 1);

struct BenchmarkRow {
  std::string model;        // "svr" | "forest"
  std::string target;       // "valence" | "arousal"
  std::string feature_set;  // "CFS" | "SFS"
  std::size_t n_features = 0;
  double score = 0.0;  // mean 10-fold R^2
  double std_dev = 0.0;
  std::vector<double> fold_scores;
  std::vector<double> fold_losses;
  std::uint64_t plan_seed = 0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  // (model, target) -> SFS score minus CFS score
  std::map<std::pair<std::string, std::string>, double> deltas;
  // (model, target) -> dimension reduction rate of the SFS
  std::map<std::pair<std::string, std::string>, double> reduction_rates;
  std::size_t k = 0;
  std::uint64_t master_seed = 0;
};

struct BenchmarkConfig {
  std::size_t k = 10;
  std::uint64_t seed = 0;
  SvrParams svr;
  ForestParams forest;
  std::size_t threads = 1;
};

// Runs every (model, target, feature set) cell of the CFS-vs-SFS comparison.
// CFS and SFS runs of the same (model, target) share one fold plan so deltas
// are not confounded by fold assignment.
BenchmarkReport benchmark(
    const Dataset& cfs,
    const std::map<std::pair<std::string, std::string>, SelectedFeatureSet>& sfs_artifacts,
    const BenchmarkConfig& config);

}  // namespace mer
