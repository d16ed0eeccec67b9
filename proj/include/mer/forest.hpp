#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mer/matrix.hpp"

namespace mer {

// CART regression tree node. Leaves hold the mean target of the samples that
// reached them.
struct TreeNode {
  // internal
  std::size_t feature_index = 0;
  double threshold = 0.0;
  std::unique_ptr<TreeNode> left, right;
  // leaf
  double value = 0.0;
  std::size_t count = 0;
  // squared-error sum of the targets reaching this node, recorded at build
  // time for impurity-based importance
  double sse = 0.0;

  bool is_leaf() const { return !left; }
};

struct ForestParams {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::size_t features_per_split = 0;  // 0 means all
  bool bootstrap = true;
};

struct ForestModel {
  // move-only: trees are held by unique_ptr
  ForestModel() = default;
  ForestModel(const ForestModel&) = delete;
  ForestModel& operator=(const ForestModel&) = delete;
  ForestModel(ForestModel&&) = default;
  ForestModel& operator=(ForestModel&&) = default;

  std::vector<std::unique_ptr<TreeNode>> trees;
  ForestParams params;
  std::vector<std::uint64_t> per_tree_seeds;
  std::vector<std::vector<std::size_t>> oob_indices;  // per tree
  std::size_t n_features = 0;
};

enum class ImportanceMode { Impurity, OobMaePermutation };

std::unique_ptr<TreeNode> fit_tree(const Matrix& X, const std::vector<double>& y,
                                   const ForestParams& params, std::uint64_t seed);

double predict_tree(const TreeNode& root, const double* x, std::size_t d);
double predict_tree(const TreeNode& root, const std::vector<double>& x);

ForestModel train_forest(const Matrix& X, const std::vector<double>& y,
                         const ForestParams& params, std::uint64_t seed,
                         std::size_t threads = 1);

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X);

// Impurity mode: mean over trees of the total weighted squared-error reduction
// per feature, normalized to sum 1. OOB-MAE mode: mean increase in a tree's
// out-of-bag MAE when the feature column is permuted (requires bootstrap).
std::vector<double> forest_feature_importance(const ForestModel& model, const Matrix& X,
                                              const std::vector<double>& y,
                                              ImportanceMode mode = ImportanceMode::Impurity,
                                              std::uint64_t seed = 0);

// Mean per-tree out-of-bag MAE, the baseline of the permutation mode.
double forest_oob_mae(const ForestModel& model, const Matrix& X, const std::vector<double>& y);

}  // namespace mer
