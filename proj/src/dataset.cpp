#include "mer/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mer/rng.hpp"

namespace mer {
namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, delim)) out.push_back(cell);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

std::string strip_cr(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw std::runtime_error("non-numeric cell '" + cell + "' at row " +
                             std::to_string(row) + ", column " + std::to_string(col));
  }
  return value;
}

// Affine map from [lo, hi] onto [-1, 1].
double rescale_target(double v, double lo, double hi) {
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  return (v - mid) / half;
}

void validate_dataset(const Dataset& ds) {
  std::set<std::string> seen;
  for (const auto& id : ds.song_ids) {
    if (!seen.insert(id).second)
      throw std::runtime_error("duplicate song_id '" + id + "'");
  }
  for (double v : ds.X.data)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite feature value");
}

}  // namespace

const std::vector<double>& Dataset::target(const std::string& name) const {
  if (name == "valence") return valence;
  if (name == "arousal") return arousal;
  throw std::invalid_argument("unknown target '" + name + "'");
}

Dataset load_canonical(const std::filesystem::path& path,
                       std::pair<double, double> target_range) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file " + path.string());
  auto header = split_line(strip_cr(line), ',');
  if (header.size() < 4 || header.front() != "song_id" ||
      header[header.size() - 2] != "valence" || header.back() != "arousal") {
    throw std::runtime_error(
        "malformed header in " + path.string() +
        ": expected song_id,<features...>,valence,arousal");
  }
  const std::size_t d = header.size() - 3;

  Dataset ds;
  ds.feature_names.assign(header.begin() + 1, header.end() - 2);

  std::vector<double> rows;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line, ',');
    if (cells.size() != header.size()) {
      throw std::runtime_error("ragged row " + std::to_string(row_no) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    }
    ds.song_ids.push_back(cells[0]);
    for (std::size_t j = 1; j < cells.size(); ++j)
      rows.push_back(parse_cell(cells[j], row_no, j + 1));
  }
  const std::size_t n = ds.song_ids.size();
  ds.X = Matrix(n, d);
  ds.valence.resize(n);
  ds.arousal.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) ds.X(i, j) = rows[i * (d + 2) + j];
    ds.valence[i] = rows[i * (d + 2) + d];
    ds.arousal[i] = rows[i * (d + 2) + d + 1];
  }

  bool needs_rescale = false;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(ds.valence[i]) > 1.0 || std::abs(ds.arousal[i]) > 1.0) needs_rescale = true;
  if (needs_rescale) {
    for (std::size_t i = 0; i < n; ++i) {
      ds.valence[i] = std::clamp(
          rescale_target(ds.valence[i], target_range.first, target_range.second), -1.0, 1.0);
      ds.arousal[i] = std::clamp(
          rescale_target(ds.arousal[i], target_range.first, target_range.second), -1.0, 1.0);
    }
  }
  validate_dataset(ds);
  return ds;
}

void save_canonical(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "song_id";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << ",valence,arousal\n";
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << ',' << buf;
  };
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    out << ds.song_ids[i];
    for (std::size_t j = 0; j < ds.n_features(); ++j) emit(ds.X(i, j));
    emit(ds.valence[i]);
    emit(ds.arousal[i]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

FeatureSeries clip_window(const FeatureSeries& series, double t_start, double t_end) {
  if (t_start > t_end) throw std::invalid_argument("clip_window: t_start > t_end");
  FeatureSeries out;
  out.song_id = series.song_id;
  out.feature_names = series.feature_names;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < series.frame_times.size(); ++i) {
    const double t = series.frame_times[i];
    if (t >= t_start && t <= t_end) {
      keep.push_back(i);
      out.frame_times.push_back(t);
    }
  }
  if (keep.empty())
    throw std::runtime_error("clip_window: no frames left for song '" + series.song_id + "'");
  out.frames = series.frames.take_rows(keep);
  return out;
}

std::vector<double> temporal_mean(const FeatureSeries& series) {
  const std::size_t n = series.frames.rows, d = series.frames.cols;
  if (n == 0) throw std::invalid_argument("temporal_mean: empty series");
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[j] += series.frames(i, j);
  for (auto& v : out) v /= static_cast<double>(n);
  return out;
}

std::pair<Matrix, ColumnStats> zscore_normalize(const Matrix& X) {
  const std::size_t n = X.rows, d = X.cols;
  if (n == 0) throw std::invalid_argument("zscore_normalize: empty matrix");
  ColumnStats stats;
  stats.means.assign(d, 0.0);
  stats.stds.assign(d, 0.0);
  stats.constant_mask.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += X(i, j);
    m /= static_cast<double>(n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dlt = X(i, j) - m;
      s += dlt * dlt;
    }
    stats.means[j] = m;
    stats.stds[j] = std::sqrt(s / static_cast<double>(n));
    stats.constant_mask[j] = (stats.stds[j] == 0.0);
  }
  return {zscore_apply(X, stats), stats};
}

Matrix zscore_apply(const Matrix& X, const ColumnStats& stats) {
  if (X.cols != stats.means.size())
    throw std::invalid_argument("zscore_apply: dimension mismatch");
  Matrix out(X.rows, X.cols);
  for (std::size_t j = 0; j < X.cols; ++j) {
    if (stats.constant_mask[j]) {
      for (std::size_t i = 0; i < X.rows; ++i) out(i, j) = 0.0;
    } else {
      for (std::size_t i = 0; i < X.rows; ++i)
        out(i, j) = (X(i, j) - stats.means[j]) / stats.stds[j];
    }
  }
  return out;
}

namespace {

Dataset subset_rows(const Dataset& ds, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());  // keep original row order within each side
  Dataset out;
  out.feature_names = ds.feature_names;
  out.X = ds.X.take_rows(idx);
  for (auto i : idx) {
    out.song_ids.push_back(ds.song_ids[i]);
    out.valence.push_back(ds.valence[i]);
    out.arousal.push_back(ds.arousal[i]);
  }
  return out;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& ds, double ratio, std::uint64_t seed) {
  const std::size_t n = ds.n_samples();
  if (ratio <= 0.0 || ratio >= 1.0) throw std::invalid_argument("split: need 0 < ratio < 1");
  if (n < 2) throw std::invalid_argument("split: need at least 2 samples");
  const std::size_t n_sel = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (n_sel == 0 || n_sel == n)
    throw std::invalid_argument("split: a side would be empty");
  Rng rng(seed);
  auto order = shuffled_indices(n, rng);
  std::vector<std::size_t> sel(order.begin(), order.begin() + n_sel);
  std::vector<std::size_t> val(order.begin() + n_sel, order.end());
  return {subset_rows(ds, std::move(sel)), subset_rows(ds, std::move(val))};
}

std::pair<Dataset, std::vector<std::size_t>> generate_synthetic(const SyntheticSpec& spec,
                                                                std::uint64_t seed) {
  if (spec.noise_sigma < 0.0) throw std::invalid_argument("generate_synthetic: noise_sigma < 0");
  const std::size_t n = spec.n_samples;
  const std::size_t d = spec.n_informative + spec.n_noise;
  Rng rng(seed);

  Dataset ds;
  ds.X = Matrix(n, d);
  for (auto& v : ds.X.data) v = normal01(rng);
  for (std::size_t i = 0; i < n; ++i) ds.song_ids.push_back("syn_" + std::to_string(i));
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.push_back("f" + std::to_string(j));

  auto informative = shuffled_indices(d, rng);
  informative.resize(spec.n_informative);
  std::sort(informative.begin(), informative.end());

  // Rejecting small magnitudes keeps every informative column individually
  // detectable; a floor of 1.5 (vs the documented minimum of 0.5) bounds the
  // contribution spread so tree ensembles rank all informative columns above
  // the noise columns.
  auto draw_coef = [&] {
    double c = uniform_in(rng, spec.coef_lo, spec.coef_hi);
    while (std::abs(c) < 1.5) c = uniform_in(rng, spec.coef_lo, spec.coef_hi);
    return c;
  };
  auto make_target = [&] {
    std::vector<double> coef(spec.n_informative);
    for (auto& c : coef) c = draw_coef();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t = 0; t < spec.n_informative; ++t)
        y[i] += coef[t] * ds.X(i, informative[t]);
      if (spec.noise_sigma > 0.0) y[i] += spec.noise_sigma * normal01(rng);
    }
    double peak = 0.0;
    for (double v : y) peak = std::max(peak, std::abs(v));
    if (peak > 1.0)  // scale into [-1,1]; preserves linearity in the features
      for (auto& v : y) v /= peak;
    return y;
  };
  ds.valence = make_target();
  ds.arousal = make_target();
  return {std::move(ds), std::move(informative)};
}

namespace {

// Column headers of the dynamic annotation files look like sample_15000ms.
std::optional<double> annotation_time_seconds(const std::string& header) {
  std::string s = header;
  if (s.rfind("sample_", 0) == 0) s = s.substr(7);
  if (s.size() > 2 && s.substr(s.size() - 2) == "ms") {
    s = s.substr(0, s.size() - 2);
    try {
      return std::stod(s) / 1000.0;
    } catch (...) {
      return std::nullopt;
    }
  }
  try {
    return std::stod(s);
  } catch (...) {
    return std::nullopt;
  }
}

// song_id -> window-averaged annotation value.
std::map<std::string, double> load_annotations(const std::filesystem::path& file,
                                               const AdapterConfig& adapter) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open annotation file " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty annotation file " + file.string());
  auto header = split_line(strip_cr(line), ',');
  if (header.empty() || header[0] != "song_id")
    throw std::runtime_error("annotation file " + file.string() + " must start with song_id");

  std::vector<bool> in_window(header.size(), false);
  for (std::size_t j = 1; j < header.size(); ++j) {
    auto t = annotation_time_seconds(header[j]);
    in_window[j] = t && *t >= adapter.window_start && *t <= adapter.window_end;
  }

  std::map<std::string, double> out;
  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line, ',');
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 1; j < cells.size() && j < header.size(); ++j) {
      if (!in_window[j] || cells[j].empty()) continue;
      sum += parse_cell(cells[j], row_no, j + 1);
      ++count;
    }
    if (count == 0) continue;
    double v = sum / static_cast<double>(count);
    if (adapter.annotation_lo != -1.0 || adapter.annotation_hi != 1.0)
      v = rescale_target(v, adapter.annotation_lo, adapter.annotation_hi);
    out[cells[0]] = std::clamp(v, -1.0, 1.0);
  }
  return out;
}

FeatureSeries load_song_file(const std::filesystem::path& file, const AdapterConfig& adapter) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty feature file " + file.string());
  auto header = split_line(strip_cr(line), adapter.delimiter);

  FeatureSeries series;
  series.song_id = file.stem().string();
  std::size_t ts_col = header.size();
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == adapter.timestamp_column) {
      ts_col = j;
    } else {
      series.feature_names.push_back(header[j]);
    }
  }

  std::vector<double> values;
  std::size_t row_no = 1, frames = 0;
  while (std::getline(in, line)) {
    ++row_no;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_line(line, adapter.delimiter);
    if (cells.size() != header.size())
      throw std::runtime_error("ragged row " + std::to_string(row_no) + " in " + file.string());
    double t = static_cast<double>(frames);  // fallback when no timestamp column
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double v = parse_cell(cells[j], row_no, j + 1);
      if (j == ts_col)
        t = v;
      else
        values.push_back(v);
    }
    series.frame_times.push_back(t);
    ++frames;
  }
  series.frames = Matrix(frames, series.feature_names.size());
  series.frames.data = std::move(values);
  for (std::size_t i = 1; i < series.frame_times.size(); ++i)
    if (series.frame_times[i] <= series.frame_times[i - 1])
      throw std::runtime_error("frame times not strictly increasing in " + file.string());
  return series;
}

}  // namespace

DeamLoadResult load_deam(const std::filesystem::path& features_dir,
                         const std::filesystem::path& valence_file,
                         const std::filesystem::path& arousal_file,
                         const AdapterConfig& adapter) {
  if (!std::filesystem::is_directory(features_dir))
    throw std::runtime_error("feature directory not found: " + features_dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(features_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == adapter.feature_extension)
      files.push_back(entry.path());
  }
  if (files.empty())
    throw std::runtime_error("no " + adapter.feature_extension + " files in " +
                             features_dir.string());
  std::sort(files.begin(), files.end());  // song-id order, scheduling independent

  const auto valence = load_annotations(valence_file, adapter);
  const auto arousal = load_annotations(arousal_file, adapter);

  DeamLoadResult result;
  Dataset& ds = result.dataset;
  std::vector<double> rows;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    auto vit = valence.find(id);
    auto ait = arousal.find(id);
    if (vit == valence.end() || ait == arousal.end()) {
      ++result.skipped;
      continue;
    }
    auto series = load_song_file(file, adapter);
    auto clipped = clip_window(series, adapter.window_start, adapter.window_end);
    auto mean = temporal_mean(clipped);
    if (ds.feature_names.empty()) ds.feature_names = series.feature_names;
    if (mean.size() != ds.feature_names.size())
      throw std::runtime_error("feature count mismatch in " + file.string());
    ds.song_ids.push_back(id);
    rows.insert(rows.end(), mean.begin(), mean.end());
    ds.valence.push_back(vit->second);
    ds.arousal.push_back(ait->second);
  }
  if (ds.song_ids.empty())
    throw std::runtime_error("no songs matched both annotation files");
  const double skip_frac =
      static_cast<double>(result.skipped) / static_cast<double>(files.size());
  if (skip_frac > adapter.id_mismatch_tolerance)
    throw std::runtime_error("annotation/feature id mismatch beyond tolerance: " +
                             std::to_string(result.skipped) + " of " +
                             std::to_string(files.size()) + " songs skipped");
  ds.X = Matrix(ds.song_ids.size(), ds.feature_names.size());
  ds.X.data = std::move(rows);
  validate_dataset(ds);
  return result;
}

const std::vector<std::string> kDefaultFamilyPrefixes = {
    "audSpec_Rfilt_sma",
    "pcm_fftMag_spectral",
    "pcm_fftMag_mfcc",
    "pcm_fftMag_fband",
};

std::map<std::string, std::size_t> group_features_by_family(
    const std::vector<std::string>& names, const std::vector<std::string>& prefixes) {
  std::map<std::string, std::size_t> out;
  for (const auto& name : names) {
    const std::string* best = nullptr;
    for (const auto& prefix : prefixes) {
      if (name.rfind(prefix, 0) == 0 && (!best || prefix.size() > best->size()))
        best = &prefix;
    }
    ++out[best ? *best : "other"];
  }
  return out;
}

}  // namespace mer
