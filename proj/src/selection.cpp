#include "mer/selection.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <thread>
#include <atomic>

#include "mer/folds.hpp"
#include "mer/metrics.hpp"
#include "mer/rng.hpp"

namespace mer {

FeatureRanking rfe(const Matrix& X, const std::vector<double>& y, const EstimatorSpec& spec,
                   std::size_t n_target, std::size_t step, std::uint64_t seed,
                   const RfeObserver& observer, std::size_t threads) {
  const std::size_t d = X.cols;
  if (n_target < 1 || n_target > d) throw std::invalid_argument("rfe: need 1 <= n_target <= D");
  if (step < 1) throw std::invalid_argument("rfe: step >= 1 required");

  FeatureRanking ranking;
  ranking.rank.assign(d, 1);
  std::vector<std::size_t> surviving(d);
  for (std::size_t j = 0; j < d; ++j) surviving[j] = j;

  std::size_t iteration = 0;
  while (true) {
    const Matrix Xs = X.take_cols(surviving);
    FittedEstimator fitted;
    try {
      fitted = fit_estimator(spec, Xs, y, derive_seed(seed, iteration), threads);
    } catch (const std::exception& e) {
      throw std::runtime_error("rfe: estimator failed with " +
                               std::to_string(surviving.size()) + " surviving features: " +
                               e.what());
    }
    if (observer) observer(surviving, fitted);
    if (surviving.size() <= n_target) break;

    const auto importance =
        estimator_importance(spec, fitted, Xs, y, derive_seed(seed, iteration, 1));
    const std::size_t n_remove = std::min(step, surviving.size() - n_target);

    // Order by (importance asc, index desc): least important first, ties drop
    // the higher original index first.
    std::vector<std::size_t> order(surviving.size());
    for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (importance[a] != importance[b]) return importance[a] < importance[b];
      return surviving[a] > surviving[b];
    });

    std::vector<bool> removed(surviving.size(), false);
    for (std::size_t r = 0; r < n_remove; ++r) {
      const std::size_t local = order[r];
      removed[local] = true;
      ranking.elimination_trace.emplace_back(surviving[local], importance[local]);
    }
    std::vector<std::size_t> next;
    next.reserve(surviving.size() - n_remove);
    for (std::size_t j = 0; j < surviving.size(); ++j)
      if (!removed[j]) next.push_back(surviving[j]);
    surviving = std::move(next);
    ++iteration;
  }

  // Eliminated ranks in reverse removal order: last removed -> rank 2.
  const std::size_t removals = ranking.elimination_trace.size();
  for (std::size_t t = 0; t < removals; ++t)
    ranking.rank[ranking.elimination_trace[t].first] = removals - t + 1;
  return ranking;
}

namespace {

// Visited subset sizes for a run from `d` down to 1 with the given step.
std::vector<std::size_t> elimination_sizes(std::size_t d, std::size_t step) {
  std::vector<std::size_t> sizes;
  std::size_t s = d;
  while (true) {
    sizes.push_back(s);
    if (s == 1) break;
    s -= std::min(step, s - 1);
  }
  return sizes;
}

}  // namespace

SelectedFeatureSet rfecv(const Matrix& X, const std::vector<double>& y,
                         const EstimatorSpec& spec, std::size_t k, std::size_t step,
                         std::uint64_t seed, std::size_t threads) {
  if (k < 2 || X.rows < k) throw std::invalid_argument("rfecv: need 2 <= k <= N");
  const std::size_t d = X.cols;

  const auto plan = kfold_partition(X.rows, k, derive_seed(seed, 0x666f6c64));
  const auto sizes = elimination_sizes(d, step);

  // fold -> size -> held-out R^2
  std::vector<std::map<std::size_t, double>> fold_scores(k);
  auto run_fold = [&](std::size_t f) {
    const auto train_idx = plan.train_indices(f);
    const auto test_idx = plan.test_indices(f);
    if (test_idx.size() < 2 || train_idx.size() < 2)
      throw std::runtime_error("rfecv: fold " + std::to_string(f) + " has fewer than 2 samples");
    const Matrix X_train = X.take_rows(train_idx);
    const Matrix X_test = X.take_rows(test_idx);
    const auto y_train = take(y, train_idx);
    const auto y_test = take(y, test_idx);
    auto observer = [&](const std::vector<std::size_t>& surviving,
                        const FittedEstimator& fitted) {
      const auto pred = fitted.predict(X_test.take_cols(surviving));
      fold_scores[f][surviving.size()] = r2_score(y_test, pred);
    };
    rfe(X_train, y_train, spec, 1, step, derive_seed(seed, 1, f), observer, 1);
  };

  if (threads <= 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(threads, k); ++w) {
      pool.emplace_back([&] {
        for (std::size_t f = next.fetch_add(1); f < k; f = next.fetch_add(1)) run_fold(f);
      });
    }
    for (auto& th : pool) th.join();
  }

  SelectedFeatureSet sfs;
  sfs.estimator = spec;
  sfs.master_seed = seed;
  for (std::size_t size : sizes) {
    SizeScore score;
    for (std::size_t f = 0; f < k; ++f) score.fold_scores.push_back(fold_scores[f].at(size));
    score.mean = mean_of(score.fold_scores);
    sfs.scores_by_size[size] = std::move(score);
  }

  // argmax of the mean score; ties resolve to the smaller size (map iteration
  // is ascending by size, so strict > keeps the first maximum).
  std::size_t best_size = sizes.back();
  double best_mean = -std::numeric_limits<double>::infinity();
  for (const auto& [size, score] : sfs.scores_by_size) {
    if (score.mean > best_mean) {
      best_mean = score.mean;
      best_size = size;
    }
  }
  sfs.chosen_size = best_size;

  const auto ranking = rfe(X, y, spec, best_size, step, derive_seed(seed, 2), nullptr, threads);
  for (std::size_t j = 0; j < d; ++j)
    if (ranking.rank[j] == 1) sfs.selected_indices.push_back(j);
  return sfs;
}

Dataset apply_selection(const Dataset& dataset, const SelectedFeatureSet& sfs) {
  for (std::size_t t = 0; t < sfs.selected_indices.size(); ++t) {
    const std::size_t j = sfs.selected_indices[t];
    if (j >= dataset.n_features())
      throw std::invalid_argument("apply_selection: index " + std::to_string(j) +
                                  " out of range");
    if (!sfs.selected_names.empty() &&
        sfs.selected_names[t] != dataset.feature_names[j]) {
      throw std::invalid_argument("apply_selection: feature name mismatch at index " +
                                  std::to_string(j) + " ('" + sfs.selected_names[t] +
                                  "' vs '" + dataset.feature_names[j] + "')");
    }
  }
  Dataset out;
  out.song_ids = dataset.song_ids;
  out.valence = dataset.valence;
  out.arousal = dataset.arousal;
  out.X = dataset.X.take_cols(sfs.selected_indices);
  for (auto j : sfs.selected_indices) out.feature_names.push_back(dataset.feature_names[j]);
  return out;
}

double compute_reduction_rate(std::size_t d_original, std::size_t d_selected) {
  if (d_selected == 0 || d_selected > d_original)
    throw std::invalid_argument("compute_reduction_rate: need 0 < d_selected <= d_original");
  return static_cast<double>(d_original - d_selected) / static_cast<double>(d_original);
}

}  // namespace mer
