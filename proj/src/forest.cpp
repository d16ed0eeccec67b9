#include "mer/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mer/metrics.hpp"
#include "mer/rng.hpp"

namespace mer {
namespace {

struct BestSplit {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();  // combined child SSE
};

// Grows one tree. Each feature's index order is sorted once at the root and
// kept sorted through node partitions (a partition preserves relative order),
// so the per-node split search is a linear scan instead of a sort. Block d of
// `order` holds the node's samples in ascending original index; all node
// statistics and the exact SSE recompute iterate that block, which keeps the
// accumulation order independent of the feature being scanned.
class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const std::vector<double>& y, const ForestParams& params)
      : X_(X), y_(y), params_(params), n_(X.rows), d_(X.cols),
        order_((d_ + 1) * n_), scratch_(n_), goes_left_(n_) {
    for (std::size_t f = 0; f < d_; ++f) {
      std::size_t* blk = block(f);
      std::iota(blk, blk + n_, std::size_t{0});
      std::sort(blk, blk + n_, [&, f](std::size_t a, std::size_t b) {
        if (X_(a, f) != X_(b, f)) return X_(a, f) < X_(b, f);
        return y_[a] < y_[b];  // value ties scan in target order
      });
    }
    std::iota(block(d_), block(d_) + n_, std::size_t{0});
  }

  std::unique_ptr<TreeNode> build(Rng& rng) { return build_node(0, n_, 0, rng); }

 private:
  std::size_t* block(std::size_t f) { return order_.data() + f * n_; }

  // Combined child SSE of a candidate split, computed the straightforward way
  // (two-pass, samples visited in ascending index order). This is the
  // reference quantity; the fast prefix-sum scan only narrows down which
  // candidates to feed through it.
  double exact_split_sse(std::size_t lo, std::size_t hi, std::size_t f, double t) {
    const std::size_t* id = block(d_);
    double sum_l = 0.0, sum_r = 0.0;
    std::size_t nl = 0, nr = 0;
    for (std::size_t p = lo; p < hi; ++p) {
      const std::size_t i = id[p];
      if (X_(i, f) <= t) {
        sum_l += y_[i];
        ++nl;
      } else {
        sum_r += y_[i];
        ++nr;
      }
    }
    const double mean_l = sum_l / static_cast<double>(nl);
    const double mean_r = sum_r / static_cast<double>(nr);
    // left and right accumulate separately so the result matches summing each
    // child on its own
    double sse_l = 0.0, sse_r = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      const std::size_t i = id[p];
      if (X_(i, f) <= t) {
        const double d = y_[i] - mean_l;
        sse_l += d * d;
      } else {
        const double d = y_[i] - mean_r;
        sse_r += d * d;
      }
    }
    return sse_l + sse_r;
  }

  // Candidate thresholds are midpoints of consecutive distinct sorted values.
  // Ties in quality resolve to (lower feature index, lower threshold) via the
  // scan order and strict comparison. A fast prefix-sum scan proposes a
  // near-minimal band of candidates; the winner within the band is decided by
  // the exact two-pass SSE so that mathematically tied candidates (e.g. two
  // features inducing the same partition) compare equal and fall to the
  // documented tie-break.
  BestSplit find_best_split(std::size_t lo, std::size_t hi,
                            const std::vector<std::size_t>& features) {
    const std::size_t m = hi - lo;

    // pass 1: fast lower envelope, recording every candidate's prefix-sum SSE
    double fast_best = std::numeric_limits<double>::infinity();
    double magnitude = 0.0;
    candidates_.clear();
    for (std::size_t f : features) {
      const std::size_t* seg = block(f) + lo;
      double sum_l = 0.0, sq_l = 0.0, sum_r = 0.0, sq_r = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double t = y_[seg[i]];
        sum_r += t;
        sq_r += t * t;
      }
      magnitude = std::max(magnitude, sq_r);
      for (std::size_t i = 0; i + 1 < m; ++i) {
        const double t = y_[seg[i]];
        sum_l += t;
        sq_l += t * t;
        sum_r -= t;
        sq_r -= t * t;
        if (X_(seg[i], f) == X_(seg[i + 1], f)) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(m - i - 1);
        const double sse = (sq_l - sum_l * sum_l / nl) + (sq_r - sum_r * sum_r / nr);
        fast_best = std::min(fast_best, sse);
        candidates_.push_back({sse, f, i});
      }
    }
    BestSplit best;
    if (!std::isfinite(fast_best)) return best;

    // pass 2: exact comparison within the numerical band of the fast minimum;
    // candidates were appended in (feature, threshold) order, so the strict <
    // below resolves exact ties to the lower feature index / lower threshold
    const double band = fast_best + 1e-9 * (1.0 + magnitude);
    for (const auto& c : candidates_) {
      if (c.fast_sse > band) continue;
      const std::size_t* seg = block(c.feature) + lo;
      const double threshold = 0.5 * (X_(seg[c.pos], c.feature) + X_(seg[c.pos + 1], c.feature));
      const double sse = exact_split_sse(lo, hi, c.feature, threshold);
      if (sse < best.sse) {
        best.found = true;
        best.feature = c.feature;
        best.threshold = threshold;
        best.sse = sse;
      }
    }
    return best;
  }

  std::unique_ptr<TreeNode> build_node(std::size_t lo, std::size_t hi, std::size_t depth,
                                       Rng& rng) {
    auto node = std::make_unique<TreeNode>();
    const std::size_t* id = block(d_);
    node->count = hi - lo;
    double mean = 0.0;
    for (std::size_t p = lo; p < hi; ++p) mean += y_[id[p]];
    mean /= static_cast<double>(hi - lo);
    node->value = mean;
    double sse = 0.0;
    for (std::size_t p = lo; p < hi; ++p) {
      const double d = y_[id[p]] - mean;
      sse += d * d;
    }
    node->sse = sse;

    const bool pure = node->sse == 0.0;
    const bool too_small = hi - lo < params_.min_samples_split;
    const bool too_deep = params_.max_depth && depth >= *params_.max_depth;
    if (pure || too_small || too_deep) return node;

    std::vector<std::size_t> features(d_);
    std::iota(features.begin(), features.end(), 0);
    if (params_.features_per_split > 0 && params_.features_per_split < d_) {
      fisher_yates(features, rng);
      features.resize(params_.features_per_split);
      std::sort(features.begin(), features.end());
    }

    const auto best = find_best_split(lo, hi, features);
    if (!best.found || best.sse >= node->sse) return node;

    std::size_t nl = 0;
    for (std::size_t p = lo; p < hi; ++p) {
      const bool left = X_(id[p], best.feature) <= best.threshold;
      goes_left_[id[p]] = left;
      nl += left;
    }
    // stable partition of every block keeps each per-feature order sorted
    for (std::size_t b = 0; b <= d_; ++b) {
      std::size_t* seg = block(b) + lo;
      std::size_t wl = 0, wr = nl;
      for (std::size_t i = 0; i < hi - lo; ++i) {
        if (goes_left_[seg[i]])
          scratch_[wl++] = seg[i];
        else
          scratch_[wr++] = seg[i];
      }
      std::copy(scratch_.begin(), scratch_.begin() + (hi - lo), seg);
    }

    node->feature_index = best.feature;
    node->threshold = best.threshold;
    node->left = build_node(lo, lo + nl, depth + 1, rng);
    node->right = build_node(lo + nl, hi, depth + 1, rng);
    return node;
  }

  struct Candidate {
    double fast_sse;
    std::size_t feature;
    std::size_t pos;  // offset within the node's sorted segment
  };

  const Matrix& X_;
  const std::vector<double>& y_;
  const ForestParams& params_;
  std::size_t n_, d_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> scratch_;
  std::vector<char> goes_left_;
  std::vector<Candidate> candidates_;
};

}  // namespace

std::unique_ptr<TreeNode> fit_tree(const Matrix& X, const std::vector<double>& y,
                                   const ForestParams& params, std::uint64_t seed) {
  if (X.rows == 0 || X.rows != y.size()) throw std::invalid_argument("fit_tree: bad shapes");
  Rng rng(seed);
  TreeBuilder builder(X, y, params);
  return builder.build(rng);
}

double predict_tree(const TreeNode& root, const double* x, std::size_t d) {
  const TreeNode* node = &root;
  while (!node->is_leaf()) {
    if (node->feature_index >= d) throw std::invalid_argument("predict_tree: dimension mismatch");
    node = (x[node->feature_index] <= node->threshold) ? node->left.get() : node->right.get();
  }
  return node->value;
}

double predict_tree(const TreeNode& root, const std::vector<double>& x) {
  return predict_tree(root, x.data(), x.size());
}

ForestModel train_forest(const Matrix& X, const std::vector<double>& y,
                         const ForestParams& params, std::uint64_t seed, std::size_t threads) {
  if (X.rows == 0 || X.rows != y.size()) throw std::invalid_argument("train_forest: bad shapes");
  if (params.n_trees < 1 || params.min_samples_split < 2)
    throw std::invalid_argument("train_forest: bad params");
  const std::size_t n = X.rows;

  ForestModel model;
  model.params = params;
  model.n_features = X.cols;
  model.trees.resize(params.n_trees);
  model.per_tree_seeds.resize(params.n_trees);
  model.oob_indices.resize(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t)
    model.per_tree_seeds[t] = derive_seed(seed, t);

  auto build_one = [&](std::size_t t) {
    Rng rng(model.per_tree_seeds[t]);
    if (params.bootstrap) {
      std::vector<std::size_t> sample(n);
      std::vector<bool> in_bag(n, false);
      for (auto& s : sample) {
        s = static_cast<std::size_t>(bounded(rng, n));
        in_bag[s] = true;
      }
      Matrix Xb = X.take_rows(sample);
      std::vector<double> yb = take(y, sample);
      TreeBuilder builder(Xb, yb, params);
      model.trees[t] = builder.build(rng);
      for (std::size_t i = 0; i < n; ++i)
        if (!in_bag[i]) model.oob_indices[t].push_back(i);
    } else {
      TreeBuilder builder(X, y, params);
      model.trees[t] = builder.build(rng);
    }
  };

  if (threads <= 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) build_one(t);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next.fetch_add(1); t < params.n_trees; t = next.fetch_add(1))
          build_one(t);
      });
    }
    for (auto& th : pool) th.join();
  }
  return model;
}

std::vector<double> predict_forest(const ForestModel& model, const Matrix& X) {
  if (X.cols != model.n_features) throw std::invalid_argument("predict_forest: dimension mismatch");
  std::vector<double> out(X.rows, 0.0);
  for (const auto& tree : model.trees)
    for (std::size_t i = 0; i < X.rows; ++i) out[i] += predict_tree(*tree, X.row_ptr(i), X.cols);
  for (auto& v : out) v /= static_cast<double>(model.trees.size());
  return out;
}

namespace {

void accumulate_impurity(const TreeNode& node, std::vector<double>& acc) {
  if (node.is_leaf()) return;
  acc[node.feature_index] += node.sse - node.left->sse - node.right->sse;
  accumulate_impurity(*node.left, acc);
  accumulate_impurity(*node.right, acc);
}

}  // namespace

double forest_oob_mae(const ForestModel& model, const Matrix& X, const std::vector<double>& y) {
  double total = 0.0;
  std::size_t used = 0;
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& oob = model.oob_indices[t];
    if (oob.empty()) continue;
    double s = 0.0;
    for (auto i : oob) s += std::abs(y[i] - predict_tree(*model.trees[t], X.row_ptr(i), X.cols));
    total += s / static_cast<double>(oob.size());
    ++used;
  }
  if (used == 0) throw std::runtime_error("forest_oob_mae: no out-of-bag samples");
  return total / static_cast<double>(used);
}

std::vector<double> forest_feature_importance(const ForestModel& model, const Matrix& X,
                                              const std::vector<double>& y, ImportanceMode mode,
                                              std::uint64_t seed) {
  const std::size_t d = model.n_features;
  std::vector<double> importance(d, 0.0);

  if (mode == ImportanceMode::Impurity) {
    for (const auto& tree : model.trees) accumulate_impurity(*tree, importance);
    for (auto& v : importance) v /= static_cast<double>(model.trees.size());
    const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
    if (total > 0.0)
      for (auto& v : importance) v /= total;
    return importance;
  }

  if (!model.params.bootstrap)
    throw std::runtime_error("OOB-MAE importance requires bootstrap=true");
  std::vector<std::size_t> used(d, 0);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& oob = model.oob_indices[t];
    if (oob.size() < 2) continue;
    std::vector<double> base(oob.size());
    std::vector<double> truth(oob.size());
    for (std::size_t i = 0; i < oob.size(); ++i) {
      base[i] = predict_tree(*model.trees[t], X.row_ptr(oob[i]), X.cols);
      truth[i] = y[oob[i]];
    }
    const double mae_base = mae(truth, base);
    std::vector<double> xrow(X.cols);
    for (std::size_t j = 0; j < d; ++j) {
      Rng rng(derive_seed(seed, t, j));
      auto perm = shuffled_indices(oob.size(), rng);
      std::vector<double> pred(oob.size());
      for (std::size_t i = 0; i < oob.size(); ++i) {
        std::copy(X.row_ptr(oob[i]), X.row_ptr(oob[i]) + X.cols, xrow.begin());
        xrow[j] = X(oob[perm[i]], j);
        pred[i] = predict_tree(*model.trees[t], xrow.data(), X.cols);
      }
      importance[j] += mae(truth, pred) - mae_base;
      ++used[j];
    }
  }
  for (std::size_t j = 0; j < d; ++j)
    if (used[j] > 0) importance[j] /= static_cast<double>(used[j]);
  return importance;
}

}  // namespace mer
