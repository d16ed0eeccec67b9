#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mer/matrix.hpp"

namespace mer {

// Per-song time-sequenced feature data.
struct FeatureSeries {
  std::string song_id;
  std::vector<double> frame_times;  // seconds, strictly increasing
  Matrix frames;                    // frame x feature
  std::vector<std::string> feature_names;
};

struct Dataset {
  std::vector<std::string> song_ids;
  std::vector<std::string> feature_names;
  Matrix X;  // N x D
  std::vector<double> valence;  // in [-1, 1]
  std::vector<double> arousal;  // in [-1, 1]

  std::size_t n_samples() const { return song_ids.size(); }
  std::size_t n_features() const { return feature_names.size(); }
  const std::vector<double>& target(const std::string& name) const;
};

struct ColumnStats {
  std::vector<double> means;
  std::vector<double> stds;  // population
  std::vector<bool> constant_mask;
};

struct SyntheticSpec {
  std::size_t n_samples = 100;
  std::size_t n_informative = 10;
  std::size_t n_noise = 50;
  double coef_lo = -2.0, coef_hi = 2.0;  // coefficient magnitude forced >= 1.5
  double noise_sigma = 0.1;
};

// Layout knobs for the DEAM-style per-song file distribution. The distribution
// format is not standardized, so everything here is configuration with the
// defaults documented in the README.
struct AdapterConfig {
  char delimiter = ';';
  std::string timestamp_column = "frameTime";
  double window_start = 15.0;
  double window_end = 44.5;
  std::string feature_extension = ".csv";
  // Annotation columns are named sample_<ms>ms; values are averaged over the
  // same clip window as the features.
  double annotation_lo = -1.0, annotation_hi = 1.0;  // source range -> [-1,1]
  double id_mismatch_tolerance = 0.5;  // max tolerated fraction of skipped songs
};

struct DeamLoadResult {
  Dataset dataset;
  std::size_t skipped = 0;  // songs missing an annotation
};

// --- canonical CSV ---------------------------------------------------------

// Header: song_id,<feature_1>,...,<feature_D>,valence,arousal
// Targets outside [-1,1] are mapped affinely from `target_range`
// (default [1,9], midpoint -> 0).
Dataset load_canonical(const std::filesystem::path& path,
                       std::pair<double, double> target_range = {1.0, 9.0});
void save_canonical(const Dataset& ds, const std::filesystem::path& path);

// --- DEAM-layout ingestion -------------------------------------------------

DeamLoadResult load_deam(const std::filesystem::path& features_dir,
                         const std::filesystem::path& valence_file,
                         const std::filesystem::path& arousal_file,
                         const AdapterConfig& adapter);

// --- preprocessing ---------------------------------------------------------

// Retains frames with t_start <= t <= t_end (closed interval).
FeatureSeries clip_window(const FeatureSeries& series, double t_start, double t_end);

// Column means over frames.
std::vector<double> temporal_mean(const FeatureSeries& series);

// Per-column (x - mean) / population std; constant columns become zeros.
std::pair<Matrix, ColumnStats> zscore_normalize(const Matrix& X);

// Apply previously computed stats (for transforming held-out data).
Matrix zscore_apply(const Matrix& X, const ColumnStats& stats);

// --- splitting & synthesis -------------------------------------------------

// Seeded Fisher-Yates shuffle; selection takes floor(ratio * N) rows.
std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio, std::uint64_t seed);

// Targets are a linear combination of the informative columns plus Gaussian
// noise, rescaled into [-1,1]; returns the informative column indices.
std::pair<Dataset, std::vector<std::size_t>> generate_synthetic(const SyntheticSpec& spec,
                                                                std::uint64_t seed);

// --- feature families ------------------------------------------------------

extern const std::vector<std::string> kDefaultFamilyPrefixes;

// Groups names by the longest matching prefix; unmatched names fall under
// "other".
std::map<std::string, std::size_t> group_features_by_family(
    const std::vector<std::string>& names,
    const std::vector<std::string>& prefixes = kDefaultFamilyPrefixes);

}  // namespace mer
