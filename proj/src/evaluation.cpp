#include "mer/evaluation.hpp"

#include <atomic>
#include <chrono>
#include <stdexcept>
#include <thread>

#include "mer/rng.hpp"

namespace mer {

CvReport cross_validate(const Matrix& X, const std::vector<double>& y,
                        const EstimatorSpec& spec, std::size_t k, std::uint64_t seed,
                        std::size_t threads) {
  if (X.rows < k) throw std::invalid_argument("cross_validate: need N >= k");
  CvReport report;
  report.plan_seed = derive_seed(seed, 0x706c616e);
  const auto plan = kfold_partition(X.rows, k, report.plan_seed);
  report.fold_scores.resize(k);
  report.fold_losses.resize(k);
  report.fold_elapsed.resize(k);

  auto run_fold = [&](std::size_t f) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto train_idx = plan.train_indices(f);
    const auto test_idx = plan.test_indices(f);
    try {
      const auto fitted = fit_estimator(spec, X.take_rows(train_idx), take(y, train_idx),
                                        derive_seed(seed, 1, f), 1);
      const auto pred = fitted.predict(X.take_rows(test_idx));
      const auto truth = take(y, test_idx);
      report.fold_scores[f] = r2_score(truth, pred);
      report.fold_losses[f] = mean_squared_error(truth, pred);
    } catch (const std::exception& e) {
      throw std::runtime_error("cross_validate: fold " + std::to_string(f) + ": " + e.what());
    }
    report.fold_elapsed[f] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
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

  report.mean_score = mean_of(report.fold_scores);
  report.std_score = fold_std(report.fold_scores);
  report.cv_loss = mean_of(report.fold_losses);
  return report;
}

BenchmarkReport benchmark(
    const Dataset& cfs,
    const std::map<std::pair<std::string, std::string>, SelectedFeatureSet>& sfs_artifacts,
    const BenchmarkConfig& config) {
  BenchmarkReport report;
  report.k = config.k;
  report.master_seed = config.seed;

  for (const std::string& model : {"svr", "forest"}) {
    for (const std::string& target : {"valence", "arousal"}) {
      const auto key = std::make_pair(model, target);
      auto it = sfs_artifacts.find(key);
      if (it == sfs_artifacts.end())
        throw std::runtime_error("benchmark: missing SFS artifact for " + model + "/" + target);

      EstimatorSpec spec;
      spec.kind = estimator_kind_from(model);
      spec.svr = config.svr;
      spec.forest = config.forest;

      // One seed per (model, target) cell, shared by the CFS and SFS runs.
      const std::uint64_t cell_seed =
          derive_seed(config.seed, std::hash<std::string>{}(model),
                      std::hash<std::string>{}(target));

      const auto& y = cfs.target(target);
      for (const std::string& set_name : {"CFS", "SFS"}) {
        Matrix X = (set_name == "CFS") ? cfs.X : apply_selection(cfs, it->second).X;
        const auto cv = cross_validate(X, y, spec, config.k, cell_seed, config.threads);
        BenchmarkRow row;
        row.model = model;
        row.target = target;
        row.feature_set = set_name;
        row.n_features = X.cols;
        row.score = cv.mean_score;
        row.std_dev = cv.std_score;
        row.fold_scores = cv.fold_scores;
        row.fold_losses = cv.fold_losses;
        row.plan_seed = cv.plan_seed;
        report.rows.push_back(std::move(row));
      }
      const auto& cfs_row = report.rows[report.rows.size() - 2];
      const auto& sfs_row = report.rows[report.rows.size() - 1];
      report.deltas[key] = sfs_row.score - cfs_row.score;
      report.reduction_rates[key] =
          compute_reduction_rate(cfs.n_features(), sfs_row.n_features);
    }
  }
  return report;
}

}  // namespace mer
