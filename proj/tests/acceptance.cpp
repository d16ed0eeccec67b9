// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 10 needs a real dataset directory (MER_DEAM_DIR with
// features/, valence.csv, arousal.csv) and is skipped when absent.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "mer/dataset.hpp"
#include "mer/evaluation.hpp"
#include "mer/folds.hpp"
#include "mer/forest.hpp"
#include "mer/metrics.hpp"
#include "mer/report.hpp"
#include "mer/rng.hpp"
#include "mer/selection.hpp"
#include "mer/serialize.hpp"
#include "mer/svr.hpp"

using namespace mer;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int failures = 0;

void report(int number, const std::string& name, bool ok) {
  std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << number << ": " << name << "\n";
  if (!ok) ++failures;
}

void report_skip(int number, const std::string& name, const std::string& why) {
  std::cout << "[SKIP] criterion " << number << ": " << name << " (" << why << ")\n";
}

#define REQUIRE_OR_RETURN(cond) \
  do {                          \
    if (!(cond)) return false;  \
  } while (0)

// --- 1: metric identities ---------------------------------------------------

bool criterion_metrics() {
  REQUIRE_OR_RETURN(std::abs(r2_score({1, 2, 3}, {1, 2, 3}) - 1.0) < 1e-12);
  REQUIRE_OR_RETURN(std::abs(r2_score({1, 2, 3}, {2, 2, 2}) - 0.0) < 1e-12);
  REQUIRE_OR_RETURN(std::abs(r2_score({1, 2, 3}, {3, 2, 1}) - (-3.0)) < 1e-12);
  REQUIRE_OR_RETURN(std::abs(mae({1, 2, 3}, 2.0) - 2.0 / 3.0) < 1e-12);
  REQUIRE_OR_RETURN(mae({5, 5, 5}, 5.0) == 0.0);
  return true;
}

// --- 2: SVR dual vs. exhaustive grid search ---------------------------------

double dual_objective_beta(const std::vector<std::vector<double>>& K,
                           const std::vector<double>& y, const std::vector<double>& beta,
                           double epsilon) {
  const std::size_t n = y.size();
  double quad = 0, lin = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) quad += beta[i] * K[i][j] * beta[j];
    lin += epsilon * std::abs(beta[i]) - y[i] * beta[i];
  }
  return 0.5 * quad + lin;
}

double grid_search_dual(const std::vector<std::vector<double>>& K, const std::vector<double>& y,
                        double C, double epsilon) {
  // N = 3: free choice of beta_1, beta_2 on a C/200 grid; beta_3 = -(b1+b2)
  // enforces the equality constraint exactly.
  const double h = C / 200.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = -200; i <= 200; ++i) {
    for (int j = -200; j <= 200; ++j) {
      const double b1 = i * h, b2 = j * h, b3 = -(b1 + b2);
      if (std::abs(b3) > C) continue;
      best = std::min(best, dual_objective_beta(K, y, {b1, b2, b3}, epsilon));
    }
  }
  return best;
}

bool criterion_svr_oracle() {
  Rng rng(7001);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix X(3, 1);
    std::vector<double> y(3);
    for (std::size_t i = 0; i < 3; ++i) {
      X(i, 0) = uniform_in(rng, -1, 1);
      y[i] = uniform_in(rng, -1, 1);
    }
    SvrParams params;
    params.kernel = (trial % 2 == 0) ? Kernel::Rbf : Kernel::Linear;
    params.C = (trial % 3 == 0) ? 0.5 : 2.0;
    params.epsilon = 0.05;
    params.tol = 1e-6;
    const auto model = train_svr(X, y, params, 1);
    REQUIRE_OR_RETURN(model.kkt_residual_at_exit < 1e-3);

    const double gamma = params.kernel == Kernel::Rbf ? resolve_gamma(params, X) : 0.0;
    std::vector<std::vector<double>> K(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const double d = X(i, 0) - X(j, 0);
        K[i][j] = params.kernel == Kernel::Rbf ? std::exp(-gamma * d * d) : X(i, 0) * X(j, 0);
      }
    }
    std::vector<double> beta(3, 0.0);
    for (std::size_t s = 0; s < model.support_indices.size(); ++s)
      beta[model.support_indices[s]] = model.dual_coeffs[s];
    const double solver_obj = dual_objective_beta(K, y, beta, params.epsilon);
    const double oracle_obj = grid_search_dual(K, y, params.C, params.epsilon);
    REQUIRE_OR_RETURN(solver_obj <= oracle_obj + 1e-4 * (1.0 + std::abs(oracle_obj)));
  }
  return true;
}

// --- 3: tree vs. exhaustive split search ------------------------------------

struct OracleNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0, value = 0;
  std::unique_ptr<OracleNode> left, right;
};

double plain_sse(const std::vector<double>& ys) {
  double mean = 0;
  for (double v : ys) mean += v;
  mean /= ys.size();
  double sse = 0;
  for (double v : ys) sse += (v - mean) * (v - mean);
  return sse;
}

std::unique_ptr<OracleNode> oracle_fit(const Matrix& X, const std::vector<double>& y,
                                       std::vector<std::size_t> idx) {
  auto node = std::make_unique<OracleNode>();
  std::vector<double> ys;
  for (auto i : idx) ys.push_back(y[i]);
  double mean = 0;
  for (double v : ys) mean += v;
  node->value = mean / ys.size();
  if (plain_sse(ys) == 0.0 || idx.size() < 2) return node;

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_f = 0;
  double best_t = 0;
  bool found = false;
  for (std::size_t f = 0; f < X.cols; ++f) {
    std::set<double> vals;
    for (auto i : idx) vals.insert(X(i, f));
    std::vector<double> sorted(vals.begin(), vals.end());
    for (std::size_t v = 0; v + 1 < sorted.size(); ++v) {
      const double t = 0.5 * (sorted[v] + sorted[v + 1]);
      std::vector<double> yl, yr;
      for (auto i : idx) (X(i, f) <= t ? yl : yr).push_back(y[i]);
      const double s = plain_sse(yl) + plain_sse(yr);
      if (s < best) {
        best = s;
        best_f = f;
        best_t = t;
        found = true;
      }
    }
  }
  if (!found || best >= plain_sse(ys)) return node;
  node->leaf = false;
  node->feature = best_f;
  node->threshold = best_t;
  std::vector<std::size_t> il, ir;
  for (auto i : idx) (X(i, best_f) <= best_t ? il : ir).push_back(i);
  node->left = oracle_fit(X, y, il);
  node->right = oracle_fit(X, y, ir);
  return node;
}

bool same_tree(const TreeNode& a, const OracleNode& b) {
  if (a.is_leaf() != b.leaf) return false;
  if (a.is_leaf()) return a.value == b.value;
  return a.feature_index == b.feature && a.threshold == b.threshold &&
         same_tree(*a.left, *b.left) && same_tree(*a.right, *b.right);
}

bool criterion_tree_oracle() {
  Rng rng(7003);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + bounded(rng, 7);
    const std::size_t d = 1 + bounded(rng, 3);
    Matrix X(n, d);
    for (auto& v : X.data) v = uniform_in(rng, -1, 1);
    std::vector<double> y(n);
    for (auto& v : y) v = uniform_in(rng, -1, 1);

    const auto tree = fit_tree(X, y, {}, 0);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    const auto oracle = oracle_fit(X, y, idx);
    REQUIRE_OR_RETURN(same_tree(*tree, *oracle));
  }
  return true;
}

// --- 4: ensemble identity ---------------------------------------------------

bool criterion_ensemble() {
  Rng rng(7005);
  for (int batch = 0; batch < 50; ++batch) {
    const std::size_t n = 10 + bounded(rng, 20);
    Matrix X(n, 3);
    for (auto& v : X.data) v = uniform_in(rng, -1, 1);
    std::vector<double> y(n);
    for (auto& v : y) v = uniform_in(rng, -1, 1);
    ForestParams params;
    params.n_trees = 5 + bounded(rng, 6);
    const auto model = train_forest(X, y, params, derive_seed(99, batch));

    Matrix Q(6, 3);
    for (auto& v : Q.data) v = uniform_in(rng, -1, 1);
    const auto pred = predict_forest(model, Q);
    for (std::size_t i = 0; i < Q.rows; ++i) {
      double sum = 0;
      for (const auto& tree : model.trees) sum += predict_tree(*tree, Q.row_ptr(i), 3);
      REQUIRE_OR_RETURN(pred[i] == sum / static_cast<double>(params.n_trees));
    }
  }

  // single-tree no-bootstrap forest memorizes distinct rows
  Matrix X(15, 2);
  for (auto& v : X.data) v = uniform_in(rng, -1, 1);
  std::vector<double> y(15);
  for (auto& v : y) v = uniform_in(rng, -1, 1);
  ForestParams params;
  params.n_trees = 1;
  params.bootstrap = false;
  const auto model = train_forest(X, y, params, 1);
  const auto pred = predict_forest(model, X);
  double err = 0;
  for (std::size_t i = 0; i < 15; ++i) err += (pred[i] - y[i]) * (pred[i] - y[i]);
  return err == 0.0;
}

// --- 5: RFECV signal recovery ----------------------------------------------

bool criterion_rfecv_recovery() {
  int successes = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSpec spec;  // 10 informative + 50 noise, sigma 0.1
    spec.n_samples = 300;
    auto [ds, informative] = generate_synthetic(spec, derive_seed(424242, seed));
    EstimatorSpec est;
    est.kind = EstimatorKind::Forest;  // 100 trees by default
    const auto sfs = rfecv(ds.X, ds.valence, est, 10, 1, seed);

    const std::set<std::size_t> chosen(sfs.selected_indices.begin(),
                                       sfs.selected_indices.end());
    std::size_t hits = 0;
    for (auto j : informative) hits += chosen.count(j);
    const bool ok = hits >= 9 && chosen.size() <= 20;
    std::cout << "  seed " << seed << ": " << hits << "/10 informative, "
              << chosen.size() << " selected" << (ok ? "" : "  <- miss") << "\n";
    if (ok) ++successes;
  }
  return successes >= 4;
}

// --- 6: reduction-rate arithmetic -------------------------------------------

bool criterion_reduction_rates() {
  const std::pair<std::size_t, double> cases[] = {
      {115, 55.8}, {74, 71.6}, {203, 22.0}, {38, 85.4}};
  for (const auto& [k, printed] : cases) {
    const double pct = compute_reduction_rate(260, k) * 100.0;
    REQUIRE_OR_RETURN(std::abs(pct - printed) <= 0.15);
  }
  return true;
}

// --- 7: benchmark structure --------------------------------------------------

bool criterion_benchmark_structure() {
  SyntheticSpec spec;
  spec.n_samples = 200;
  spec.n_informative = 4;
  spec.n_noise = 8;
  spec.noise_sigma = 0.05;
  auto [ds, informative] = generate_synthetic(spec, 31);

  std::map<std::pair<std::string, std::string>, SelectedFeatureSet> artifacts;
  for (const std::string& model : {"svr", "forest"}) {
    for (const std::string& target : {"valence", "arousal"}) {
      SelectedFeatureSet sfs;
      sfs.selected_indices = informative;
      std::sort(sfs.selected_indices.begin(), sfs.selected_indices.end());
      for (auto j : sfs.selected_indices) sfs.selected_names.push_back(ds.feature_names[j]);
      sfs.chosen_size = sfs.selected_indices.size();
      sfs.target = target;
      artifacts[{model, target}] = std::move(sfs);
    }
  }

  BenchmarkConfig config;
  config.k = 10;
  config.seed = 17;
  config.forest.n_trees = 100;
  const auto report = benchmark(ds, artifacts, config);
  REQUIRE_OR_RETURN(report.rows.size() == 8);

  std::set<std::tuple<std::string, std::string, std::string>> cells;
  for (const auto& row : report.rows) {
    cells.insert({row.model, row.target, row.feature_set});
    REQUIRE_OR_RETURN(row.fold_scores.size() == 10);
    REQUIRE_OR_RETURN(std::abs(row.score - mean_of(row.fold_scores)) < 1e-12);
    REQUIRE_OR_RETURN(std::abs(row.std_dev - fold_std(row.fold_scores)) < 1e-12);
  }
  REQUIRE_OR_RETURN(cells.size() == 8);

  // every Score/STD is recomputable from the rendered per-fold CSV
  std::istringstream csv(render_fold_csv(report));
  std::string line;
  std::getline(csv, line);  // header
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> folds;
  while (std::getline(csv, line)) {
    std::stringstream ss(line);
    std::string model, target, set_name, fold, r2, mse;
    std::getline(ss, model, ',');
    std::getline(ss, target, ',');
    std::getline(ss, set_name, ',');
    std::getline(ss, fold, ',');
    std::getline(ss, r2, ',');
    std::getline(ss, mse, ',');
    folds[{model, target, set_name}].push_back(std::stod(r2));
  }
  for (const auto& row : report.rows) {
    const auto& scores = folds.at({row.model, row.target, row.feature_set});
    REQUIRE_OR_RETURN(scores.size() == 10);
    REQUIRE_OR_RETURN(std::abs(row.score - mean_of(scores)) < 1e-12);
    REQUIRE_OR_RETURN(std::abs(row.std_dev - fold_std(scores)) < 1e-12);
  }
  return true;
}

// --- 8: partition and normalization laws ------------------------------------

bool criterion_partition_and_zscore() {
  for (std::size_t n = 2; n <= 200; ++n) {
    for (std::size_t k = 2; k <= n; ++k) {
      const auto plan = kfold_partition(n, k, n * 1000 + k);
      std::vector<std::size_t> sizes(k, 0);
      for (auto f : plan.assignments) {
        REQUIRE_OR_RETURN(f < k);
        ++sizes[f];
      }
      const std::size_t base = n / k, extra = n % k;
      for (std::size_t f = 0; f < k; ++f)
        REQUIRE_OR_RETURN(sizes[f] == base + (f < extra ? 1 : 0));
    }
  }

  Rng rng(7007);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5 + bounded(rng, 60);
    const std::size_t d = 1 + bounded(rng, 10);
    Matrix X(n, d);
    for (auto& v : X.data) v = uniform_in(rng, -5, 5);
    const auto [Z, stats] = zscore_normalize(X);
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += Z(i, j);
      mean /= static_cast<double>(n);
      double var = 0;
      for (std::size_t i = 0; i < n; ++i) var += (Z(i, j) - mean) * (Z(i, j) - mean);
      var /= static_cast<double>(n);
      REQUIRE_OR_RETURN(std::abs(mean) < 1e-9);
      REQUIRE_OR_RETURN(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
  }
  return true;
}

// --- 9: CLI determinism -------------------------------------------------------

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mer_accept_" + std::to_string(std::rand()) + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd =
      std::string(MER_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json scrubbed(const fs::path& p) {
  auto j = read_json_file(p);
  j.erase("generated_at");
  j.erase("resolved_config");  // legitimately records the thread count
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_cli_determinism() {
  TempDir tmp;
  const auto log = tmp.path / "log.txt";
  {
    std::ofstream cfg(tmp.path / "cfg.txt");
    cfg << "synthetic.n_samples = 80\n"
        << "synthetic.n_informative = 3\n"
        << "synthetic.n_noise = 7\n"
        << "synthetic.noise_sigma = 0.05\n"
        << "forest.n_trees = 20\n"
        << "svr.kernel = linear\n"
        << "svr.C = 10\n"
        << "svr.epsilon = 0.01\n";
  }
  const std::string cfg_arg = " --config " + (tmp.path / "cfg.txt").string();
  REQUIRE_OR_RETURN(
      run_cli("ingest --source synthetic --seed 3 --out-dir " + tmp.path.string() + cfg_arg,
              log) == 0);
  const std::string ds_arg = " --dataset " + (tmp.path / "dataset.csv").string();

  // select: twice serial, once with 4 threads
  const std::string sel_base = "select" + ds_arg + " --estimator forest --target valence" +
                               " --folds 5 --seed 21" + cfg_arg + " --out ";
  for (const std::string run_name : {"a", "b"}) {
    REQUIRE_OR_RETURN(
        run_cli(sel_base + (tmp.path / ("sfs_" + run_name + ".json")).string(), log) == 0);
  }
  REQUIRE_OR_RETURN(
      run_cli(sel_base + (tmp.path / "sfs_t4.json").string() + " --threads 4", log) == 0);
  const auto sfs_a = scrubbed(tmp.path / "sfs_a.json");
  REQUIRE_OR_RETURN(sfs_a == scrubbed(tmp.path / "sfs_b.json"));
  REQUIRE_OR_RETURN(sfs_a == scrubbed(tmp.path / "sfs_t4.json"));

  // benchmark needs all four artifacts; reuse the valence/forest run shape
  std::string sfs_args;
  for (const std::string est : {"svr", "forest"}) {
    for (const std::string tgt : {"valence", "arousal"}) {
      const auto artifact = tmp.path / ("sfs_" + est + "_" + tgt + ".json");
      REQUIRE_OR_RETURN(run_cli("select" + ds_arg + " --estimator " + est + " --target " + tgt +
                                    " --folds 5 --seed 23" + cfg_arg + " --out " +
                                    artifact.string(),
                                log) == 0);
      sfs_args += " --sfs " + artifact.string();
    }
  }
  const std::string bench_base =
      "benchmark" + ds_arg + sfs_args + " --folds 5 --seed 29 --no-plots" + cfg_arg +
      " --out-dir ";
  for (const std::string run_name : {"x", "y"})
    REQUIRE_OR_RETURN(run_cli(bench_base + (tmp.path / run_name).string(), log) == 0);
  REQUIRE_OR_RETURN(
      run_cli(bench_base + (tmp.path / "t4").string() + " --threads 4", log) == 0);

  const auto rx = scrubbed(tmp.path / "x" / "report.json");
  REQUIRE_OR_RETURN(rx == scrubbed(tmp.path / "y" / "report.json"));
  REQUIRE_OR_RETURN(rx == scrubbed(tmp.path / "t4" / "report.json"));
  REQUIRE_OR_RETURN(slurp(tmp.path / "x" / "folds.csv") == slurp(tmp.path / "y" / "folds.csv"));
  REQUIRE_OR_RETURN(slurp(tmp.path / "x" / "folds.csv") ==
                    slurp(tmp.path / "t4" / "folds.csv"));
  return true;
}

// --- 10: dataset-gated directional check -------------------------------------

bool criterion_deam_directional(const fs::path& deam_dir) {
  TempDir tmp;
  const auto log = tmp.path / "log.txt";
  const std::string features = (deam_dir / "features").string();
  const std::string valence = (deam_dir / "valence.csv").string();
  const std::string arousal = (deam_dir / "arousal.csv").string();

  REQUIRE_OR_RETURN(run_cli("ingest --source deam --features-dir " + features +
                                " --valence-file " + valence + " --arousal-file " + arousal +
                                " --seed 1 --out-dir " + tmp.path.string(),
                            log) == 0);
  const std::string ds_arg = " --dataset " + (tmp.path / "dataset.csv").string();

  std::string sfs_args;
  for (const std::string est : {"svr", "forest"}) {
    for (const std::string tgt : {"valence", "arousal"}) {
      const auto artifact = tmp.path / ("sfs_" + est + "_" + tgt + ".json");
      REQUIRE_OR_RETURN(run_cli("select" + ds_arg + " --estimator " + est + " --target " + tgt +
                                    " --folds 10 --step 5 --seed 1 --out " + artifact.string(),
                                log) == 0);
      sfs_args += " --sfs " + artifact.string();
    }
  }
  REQUIRE_OR_RETURN(run_cli("benchmark" + ds_arg + sfs_args +
                                " --folds 10 --seed 1 --no-plots --out-dir " +
                                (tmp.path / "bench").string(),
                            log) == 0);
  const auto report = read_json_file(tmp.path / "bench" / "report.json");
  for (const auto& delta : report.at("deltas")) {
    if (delta.at("model") == "svr")
      REQUIRE_OR_RETURN(delta.at("delta").get<double>() > 0.0);
  }
  return true;
}

}  // namespace

int main() {
  report(1, "metric identities", criterion_metrics());
  report(2, "SVR dual matches exhaustive grid search", criterion_svr_oracle());
  report(3, "tree matches exhaustive split search", criterion_tree_oracle());
  report(4, "forest is the exact tree mean; single tree memorizes", criterion_ensemble());
  report(5, "RFECV recovers the informative features", criterion_rfecv_recovery());
  report(6, "reduction rates match the published percentages", criterion_reduction_rates());
  report(7, "benchmark emits the 8-row schema, recomputable from the fold CSV",
         criterion_benchmark_structure());
  report(8, "partition and z-score laws", criterion_partition_and_zscore());
  report(9, "CLI artifacts are deterministic (reruns and serial vs parallel)",
         criterion_cli_determinism());

  const char* deam = std::getenv("MER_DEAM_DIR");
  if (deam == nullptr || !fs::is_directory(deam)) {
    report_skip(10, "full-dataset SVR deltas are positive", "MER_DEAM_DIR not set");
  } else {
    report(10, "full-dataset SVR deltas are positive", criterion_deam_directional(deam));
  }
  return failures == 0 ? 0 : 1;
}
