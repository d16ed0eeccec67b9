#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mer/config.hpp"
#include "mer/dataset.hpp"
#include "mer/emotion.hpp"
#include "mer/evaluation.hpp"
#include "mer/report.hpp"
#include "mer/selection.hpp"
#include "mer/serialize.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::size_t folds = 10;
  std::size_t step = 1;
  double ratio = 0.7;
  std::size_t threads = 1;
  std::string out_dir = ".";
  std::string config_path;
  bool no_plots = false;
};

std::uint64_t resolve_seed(CommonOpts& opts) {
  if (!opts.seed_given) {
    std::random_device rd;
    opts.seed = (static_cast<std::uint64_t>(rd()) << 32) | rd();
    std::cout << "seed: " << opts.seed << "\n";
  }
  return opts.seed;
}

mer::KeyValueConfig load_config(const CommonOpts& opts) {
  if (opts.config_path.empty()) return {};
  return mer::KeyValueConfig::from_file(opts.config_path);
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  return std::to_string(
      std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count());
}

mer::AdapterConfig adapter_from(const mer::KeyValueConfig& cfg) {
  mer::AdapterConfig a;
  a.delimiter = cfg.get_or("adapter.delimiter", ";")[0];
  a.timestamp_column = cfg.get_or("adapter.timestamp_column", a.timestamp_column);
  a.window_start = cfg.get_double("adapter.window_start", a.window_start);
  a.window_end = cfg.get_double("adapter.window_end", a.window_end);
  a.feature_extension = cfg.get_or("adapter.feature_extension", a.feature_extension);
  a.annotation_lo = cfg.get_double("adapter.annotation_lo", a.annotation_lo);
  a.annotation_hi = cfg.get_double("adapter.annotation_hi", a.annotation_hi);
  a.id_mismatch_tolerance =
      cfg.get_double("adapter.id_mismatch_tolerance", a.id_mismatch_tolerance);
  return a;
}

mer::SvrParams svr_params_from(const mer::KeyValueConfig& cfg) {
  mer::SvrParams p;
  p.C = cfg.get_double("svr.C", p.C);
  p.epsilon = cfg.get_double("svr.epsilon", p.epsilon);
  p.kernel = cfg.get_or("svr.kernel", "rbf") == "linear" ? mer::Kernel::Linear
                                                         : mer::Kernel::Rbf;
  p.gamma = cfg.get_double("svr.gamma", p.gamma);
  p.tol = cfg.get_double("svr.tol", p.tol);
  p.max_passes = static_cast<std::size_t>(cfg.get_int("svr.max_passes", 0));
  return p;
}

mer::ForestParams forest_params_from(const mer::KeyValueConfig& cfg) {
  mer::ForestParams p;
  p.n_trees = static_cast<std::size_t>(cfg.get_int("forest.n_trees", 100));
  const auto depth = cfg.get_int("forest.max_depth", 0);
  if (depth > 0) p.max_depth = static_cast<std::size_t>(depth);
  p.min_samples_split = static_cast<std::size_t>(cfg.get_int("forest.min_samples_split", 2));
  p.features_per_split = static_cast<std::size_t>(cfg.get_int("forest.features_per_split", 0));
  p.bootstrap = cfg.get_bool("forest.bootstrap", true);
  return p;
}

mer::HevnerLayout layout_from(const mer::KeyValueConfig& cfg) {
  mer::HevnerLayout layout;
  layout.angular = cfg.get_bool("hevner.angular", true);
  layout.b1 = cfg.get_double("hevner.b1", layout.b1);
  layout.b2 = cfg.get_double("hevner.b2", layout.b2);
  for (std::size_t i = 0; i < 8; ++i) {
    if (auto v = cfg.get("hevner.label_" + std::to_string(i))) layout.labels[i] = *v;
  }
  return layout;
}

json resolved_common(const CommonOpts& opts) {
  return json{{"seed", opts.seed},   {"folds", opts.folds},     {"step", opts.step},
              {"ratio", opts.ratio}, {"threads", opts.threads}, {"out_dir", opts.out_dir},
              {"config", opts.config_path}};
}

// --- ingest ----------------------------------------------------------------

int cmd_ingest(const std::string& source, const std::string& input,
               const std::string& features_dir, const std::string& valence_file,
               const std::string& arousal_file, CommonOpts& opts) {
  const auto cfg = load_config(opts);
  resolve_seed(opts);
  fs::create_directories(opts.out_dir);
  const fs::path out_csv = fs::path(opts.out_dir) / "dataset.csv";
  const fs::path sidecar = fs::path(opts.out_dir) / "dataset.provenance.json";

  json prov{{"source", source}, {"resolved_config", resolved_common(opts)},
            {"generated_at", timestamp()}};
  mer::Dataset ds;
  if (source == "canonical") {
    ds = mer::load_canonical(input);
  } else if (source == "deam") {
    const auto adapter = adapter_from(cfg);
    auto result = mer::load_deam(features_dir, valence_file, arousal_file, adapter);
    ds = std::move(result.dataset);
    auto [xn, stats] = mer::zscore_normalize(ds.X);
    ds.X = std::move(xn);
    prov["skipped_songs"] = result.skipped;
    prov["window"] = {adapter.window_start, adapter.window_end};
    prov["normalization"] = {{"means", stats.means}, {"stds", stats.stds}};
    std::cout << "ingested " << ds.n_samples() << " songs, skipped " << result.skipped << "\n";
  } else if (source == "synthetic") {
    mer::SyntheticSpec spec;
    spec.n_samples = static_cast<std::size_t>(cfg.get_int("synthetic.n_samples", 300));
    spec.n_informative = static_cast<std::size_t>(cfg.get_int("synthetic.n_informative", 10));
    spec.n_noise = static_cast<std::size_t>(cfg.get_int("synthetic.n_noise", 50));
    spec.noise_sigma = cfg.get_double("synthetic.noise_sigma", 0.1);
    spec.coef_lo = cfg.get_double("synthetic.coef_lo", spec.coef_lo);
    spec.coef_hi = cfg.get_double("synthetic.coef_hi", spec.coef_hi);
    auto [dataset, informative] = mer::generate_synthetic(spec, opts.seed);
    ds = std::move(dataset);
    prov["informative_indices"] = informative;
  } else {
    throw std::runtime_error("unknown source '" + source + "'");
  }

  mer::save_canonical(ds, out_csv);
  mer::write_json_file(prov, sidecar);
  std::cout << "wrote " << out_csv.string() << " (N=" << ds.n_samples()
            << ", D=" << ds.n_features() << ")\n";
  return 0;
}

// --- select ----------------------------------------------------------------

int cmd_select(const std::string& dataset_path, const std::string& estimator,
               const std::string& target, const std::string& out_file, CommonOpts& opts) {
  const auto cfg = load_config(opts);
  resolve_seed(opts);
  const auto ds = mer::load_canonical(dataset_path);

  mer::EstimatorSpec spec;
  spec.kind = mer::estimator_kind_from(estimator);
  spec.svr = svr_params_from(cfg);
  spec.forest = forest_params_from(cfg);

  auto sfs = mer::rfecv(ds.X, ds.target(target), spec, opts.folds, opts.step, opts.seed,
                        opts.threads);
  sfs.target = target;
  for (auto j : sfs.selected_indices) sfs.selected_names.push_back(ds.feature_names[j]);

  json artifact = mer::to_json(sfs);
  artifact["resolved_config"] = resolved_common(opts);
  artifact["generated_at"] = timestamp();
  fs::create_directories(fs::path(out_file).parent_path().empty()
                             ? "."
                             : fs::path(out_file).parent_path().string());
  mer::write_json_file(artifact, out_file);

  const double rate = mer::compute_reduction_rate(ds.n_features(), sfs.chosen_size);
  std::cout << "chosen size: " << sfs.chosen_size << " of " << ds.n_features()
            << " (reduction " << rate * 100.0 << "%)\n";
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

// --- benchmark -------------------------------------------------------------

int cmd_benchmark(const std::string& dataset_path, const std::vector<std::string>& sfs_files,
                  CommonOpts& opts) {
  const auto cfg = load_config(opts);
  resolve_seed(opts);
  const auto ds = mer::load_canonical(dataset_path);

  std::map<std::pair<std::string, std::string>, mer::SelectedFeatureSet> artifacts;
  for (const auto& file : sfs_files) {
    auto sfs = mer::sfs_from_json(mer::read_json_file(file));
    artifacts[{mer::to_string(sfs.estimator.kind), sfs.target}] = std::move(sfs);
  }

  mer::BenchmarkConfig config;
  config.k = opts.folds;
  config.seed = opts.seed;
  config.svr = svr_params_from(cfg);
  config.forest = forest_params_from(cfg);
  config.threads = opts.threads;

  const auto report = mer::benchmark(ds, artifacts, config);

  json j = mer::to_json(report);
  j["resolved_config"] = resolved_common(opts);
  j["generated_at"] = timestamp();
  const std::string md = mer::render_markdown(report);
  const std::string csv = mer::render_fold_csv(report);
  const std::string bars = opts.no_plots ? "" : mer::render_score_bars_svg(report);
  const std::string lines = opts.no_plots ? "" : mer::render_fold_lines_svg(report);

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  mer::write_json_file(j, dir / "report.json");
  mer::write_text_file(md, dir / "report.md");
  mer::write_text_file(csv, dir / "folds.csv");
  if (!opts.no_plots) {
    mer::write_text_file(bars, dir / "scores.svg");
    mer::write_text_file(lines, dir / "folds.svg");
  }
  std::cout << md;
  return 0;
}

// --- classify --------------------------------------------------------------

int cmd_classify(const std::string& input, const std::string& mode, CommonOpts& opts) {
  const auto cfg = load_config(opts);
  const auto layout = layout_from(cfg);

  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input);
  std::string line;
  std::vector<std::pair<std::string, mer::VaPoint>> annotations;
  std::size_t row_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++row_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string id, v, a;
    std::getline(ss, id, ',');
    std::getline(ss, v, ',');
    std::getline(ss, a, ',');
    if (first) {
      first = false;
      if (id == "id" || id == "song_id") continue;  // header
    }
    try {
      annotations.emplace_back(id, mer::VaPoint{std::stod(v), std::stod(a)});
    } catch (const std::exception&) {
      throw std::runtime_error("row " + std::to_string(row_no) + ": cannot parse VA point");
    }
  }

  mer::CategorizeResult result;
  try {
    result = mer::categorize_dataset(
        annotations, mode == "hevner" ? mer::CategorizeMode::Hevner : mer::CategorizeMode::Quadrant,
        layout);
  } catch (const std::exception& e) {
    for (std::size_t i = 0; i < annotations.size(); ++i) {
      const auto& p = annotations[i].second;
      if (std::abs(p.valence) > 1.0 || std::abs(p.arousal) > 1.0)
        throw std::runtime_error("row " + std::to_string(i + 2) + ": point outside [-1,1] box");
    }
    throw std::runtime_error(e.what());
  }

  fs::create_directories(opts.out_dir);
  const fs::path dir(opts.out_dir);
  mer::write_text_file(mer::render_categorized_csv(result), dir / "labels.csv");
  if (!opts.no_plots)
    mer::write_text_file(mer::render_va_scatter_svg(result), dir / "scatter.svg");
  for (const auto& [label, count] : result.counts)
    std::cout << label << ": " << count << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature-selection and regression benchmarking for valence-arousal emotion data"};
  app.require_subcommand(1);
  CommonOpts opts;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opts.seed, "master seed (drawn and printed when omitted)")
        ->each([&](const std::string&) { opts.seed_given = true; });
    cmd->add_option("--folds", opts.folds, "CV folds")->default_val(10);
    cmd->add_option("--step", opts.step, "RFE elimination step")->default_val(1);
    cmd->add_option("--ratio", opts.ratio, "selection/validation split ratio")->default_val(0.7);
    cmd->add_option("--threads", opts.threads, "worker threads")->default_val(1);
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_option("--config", opts.config_path, "key-value configuration file");
    cmd->add_flag("--no-plots", opts.no_plots, "skip SVG output");
  };

  // ingest
  std::string source = "canonical", input, features_dir, valence_file, arousal_file;
  auto* ingest = app.add_subcommand("ingest", "produce a canonical dataset file");
  ingest->add_option("--source", source, "canonical | deam | synthetic")->required();
  ingest->add_option("--input", input, "canonical CSV input");
  ingest->add_option("--features-dir", features_dir, "per-song feature files");
  ingest->add_option("--valence-file", valence_file, "valence annotation CSV");
  ingest->add_option("--arousal-file", arousal_file, "arousal annotation CSV");
  add_common(ingest);

  // select
  std::string dataset_path, estimator = "forest", target = "valence", out_file = "sfs.json";
  auto* select = app.add_subcommand("select", "run RFECV and write the selected-feature artifact");
  select->add_option("--dataset", dataset_path, "canonical dataset CSV")->required();
  select->add_option("--estimator", estimator, "svr | forest");
  select->add_option("--target", target, "valence | arousal");
  select->add_option("--out", out_file, "artifact path");
  add_common(select);

  // benchmark
  std::vector<std::string> sfs_files;
  auto* bench = app.add_subcommand("benchmark", "CFS-vs-SFS cross-validated comparison");
  bench->add_option("--dataset", dataset_path, "canonical dataset CSV (the CFS)")->required();
  bench->add_option("--sfs", sfs_files, "selected-feature artifacts (one per model/target)")
      ->required();
  add_common(bench);

  // classify
  std::string mode = "quadrant";
  auto* classify = app.add_subcommand("classify", "label VA annotations");
  classify->add_option("--input", input, "CSV of id,valence,arousal")->required();
  classify->add_option("--mode", mode, "quadrant | hevner");
  add_common(classify);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed())
      return cmd_ingest(source, input, features_dir, valence_file, arousal_file, opts);
    if (select->parsed()) return cmd_select(dataset_path, estimator, target, out_file, opts);
    if (bench->parsed()) return cmd_benchmark(dataset_path, sfs_files, opts);
    if (classify->parsed()) return cmd_classify(input, mode, opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
