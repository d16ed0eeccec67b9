#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "mer/dataset.hpp"
#include "mer/rng.hpp"

using namespace mer;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "mer_test_dataset";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

FeatureSeries make_series(const std::vector<double>& times,
                          const std::vector<std::vector<double>>& rows) {
  FeatureSeries s;
  s.song_id = "song";
  s.frame_times = times;
  s.feature_names = {"a", "b"};
  s.frames = Matrix(rows.size(), 2);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) s.frames(i, j) = rows[i][j];
  return s;
}

}  // namespace

TEST_CASE("load_canonical round trip") {
  const auto file = temp_dir() / "tiny.csv";
  write_file(file,
             "song_id,f1,f2,valence,arousal\n"
             "a,1.5,2,0.1,-0.2\n"
             "b,0,1,0.3,0.4\n"
             "c,-1,4.25,-0.9,0.0\n");
  const auto ds = load_canonical(file);
  CHECK(ds.n_samples() == 3);
  CHECK(ds.n_features() == 2);
  CHECK(ds.feature_names == std::vector<std::string>{"f1", "f2"});
  CHECK(ds.X(0, 0) == 1.5);
  CHECK(ds.valence[2] == -0.9);

  const auto file2 = temp_dir() / "tiny2.csv";
  save_canonical(ds, file2);
  const auto ds2 = load_canonical(file2);
  CHECK(ds2.song_ids == ds.song_ids);
  CHECK(ds2.X.data == ds.X.data);
  CHECK(ds2.valence == ds.valence);
  CHECK(ds2.arousal == ds.arousal);
}

TEST_CASE("load_canonical rescales [1,9] targets onto [-1,1]") {
  const auto file = temp_dir() / "scale.csv";
  write_file(file,
             "song_id,f1,valence,arousal\n"
             "a,0,5,1\n"
             "b,0,9,9\n");
  const auto ds = load_canonical(file);
  CHECK(ds.valence[0] == doctest::Approx(0.0));  // 5 -> 0
  CHECK(ds.arousal[0] == doctest::Approx(-1.0));
  CHECK(ds.valence[1] == doctest::Approx(1.0));
}

TEST_CASE("load_canonical rejects NaN cells with position") {
  const auto file = temp_dir() / "nan.csv";
  write_file(file,
             "song_id,f1,valence,arousal\n"
             "a,NaN,0,0\n");
  CHECK_THROWS_WITH_AS(load_canonical(file),
                       doctest::Contains("row 2"), std::runtime_error);
}

TEST_CASE("load_canonical rejects duplicate ids and ragged rows") {
  const auto dup = temp_dir() / "dup.csv";
  write_file(dup, "song_id,f1,valence,arousal\na,0,0,0\na,1,0,0\n");
  CHECK_THROWS_WITH_AS(load_canonical(dup), doctest::Contains("duplicate"), std::runtime_error);

  const auto ragged = temp_dir() / "ragged.csv";
  write_file(ragged, "song_id,f1,valence,arousal\na,0,0\n");
  CHECK_THROWS_WITH_AS(load_canonical(ragged), doctest::Contains("ragged"), std::runtime_error);
}

TEST_CASE("clip_window boundary inclusion") {
  auto s = make_series({14.5, 15.0, 44.5, 45.0},
                       {{1, 1}, {2, 2}, {3, 3}, {4, 4}});
  const auto clipped = clip_window(s, 15.0, 44.5);
  CHECK(clipped.frame_times == std::vector<double>{15.0, 44.5});
  CHECK(clipped.frames(0, 0) == 2);
  CHECK(clipped.frames(1, 0) == 3);
}

TEST_CASE("clip_window keeps 60 of 91 half-second frames") {
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 90; ++i) {
    times.push_back(0.5 * i);
    rows.push_back({double(i), 0.0});
  }
  const auto clipped = clip_window(make_series(times, rows), 15.0, 44.5);
  CHECK(clipped.frame_times.size() == 60);
}

TEST_CASE("clip_window identity and emptiness") {
  auto s = make_series({1.0, 2.0}, {{1, 2}, {3, 4}});
  const auto same = clip_window(s, 0.0, 100.0);
  CHECK(same.frame_times == s.frame_times);
  CHECK(same.frames.data == s.frames.data);
  CHECK_THROWS_AS(clip_window(s, 10.0, 11.0), std::runtime_error);
}

TEST_CASE("clip_window is monotone in the window") {
  Rng rng(7);
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 30; ++i) {
    times.push_back(i * 0.7);
    rows.push_back({uniform01(rng), uniform01(rng)});
  }
  const auto s = make_series(times, rows);
  const auto narrow = clip_window(s, 3.0, 12.0);
  const auto wide = clip_window(s, 1.0, 15.0);
  for (double t : narrow.frame_times) {
    CHECK(std::find(wide.frame_times.begin(), wide.frame_times.end(), t) !=
          wide.frame_times.end());
  }
}

TEST_CASE("temporal_mean") {
  CHECK(temporal_mean(make_series({0, 1}, {{1, 3}, {3, 5}})) == std::vector<double>{2, 4});
  CHECK(temporal_mean(make_series({0}, {{7, 7}})) == std::vector<double>{7, 7});
  CHECK(temporal_mean(make_series({0, 1, 2}, {{1, 0}, {2, 0}, {3, 0}})) ==
        std::vector<double>{2, 0});
}

TEST_CASE("zscore normalization laws") {
  Matrix X(3, 1);
  X(0, 0) = 1; X(1, 0) = 2; X(2, 0) = 3;
  auto [Xn, stats] = zscore_normalize(X);
  CHECK(Xn(0, 0) == doctest::Approx(-1.22474).epsilon(1e-4));
  CHECK(Xn(1, 0) == doctest::Approx(0.0));
  CHECK(Xn(2, 0) == doctest::Approx(1.22474).epsilon(1e-4));
  CHECK_FALSE(stats.constant_mask[0]);

  // column laws on random matrices
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix R(2 + trial % 7, 3);
    for (auto& v : R.data) v = uniform_in(rng, -5, 5);
    auto [Rn, rs] = zscore_normalize(R);
    for (std::size_t j = 0; j < R.cols; ++j) {
      if (rs.constant_mask[j]) continue;
      double mean = 0, var = 0;
      for (std::size_t i = 0; i < R.rows; ++i) mean += Rn(i, j);
      mean /= R.rows;
      for (std::size_t i = 0; i < R.rows; ++i) var += (Rn(i, j) - mean) * (Rn(i, j) - mean);
      var /= R.rows;
      CHECK(std::abs(mean) < 1e-9);
      CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
    // idempotence
    auto [Rnn, rs2] = zscore_normalize(Rn);
    for (std::size_t i = 0; i < Rn.data.size(); ++i)
      CHECK(std::abs(Rnn.data[i] - Rn.data[i]) < 1e-9);
  }
}

TEST_CASE("zscore constant column becomes zeros and is flagged") {
  Matrix X(3, 2);
  X(0, 0) = 5; X(1, 0) = 5; X(2, 0) = 5;
  X(0, 1) = 1; X(1, 1) = 2; X(2, 1) = 4;
  auto [Xn, stats] = zscore_normalize(X);
  CHECK(stats.constant_mask[0]);
  CHECK_FALSE(stats.constant_mask[1]);
  CHECK(Xn(0, 0) == 0.0);
  CHECK(Xn(1, 0) == 0.0);
}

namespace {

Dataset make_dataset(std::size_t n) {
  Dataset ds;
  ds.X = Matrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    ds.song_ids.push_back("s" + std::to_string(i));
    ds.X(i, 0) = double(i);
    ds.valence.push_back(0.0);
    ds.arousal.push_back(0.0);
  }
  ds.feature_names = {"a", "b"};
  return ds;
}

}  // namespace

TEST_CASE("split sizes and determinism") {
  const auto ds = make_dataset(10);
  auto [sel, val] = split(ds, 0.7, 42);
  CHECK(sel.n_samples() == 7);
  CHECK(val.n_samples() == 3);
  auto [sel2, val2] = split(ds, 0.7, 42);
  CHECK(sel.song_ids == sel2.song_ids);
  CHECK(val.song_ids == val2.song_ids);

  const auto big = make_dataset(1802);
  auto [s, v] = split(big, 0.7, 1);
  CHECK(s.n_samples() == 1261);
  CHECK(v.n_samples() == 541);
}

TEST_CASE("split partition laws over a range of n and ratios") {
  for (std::size_t n : {2u, 3u, 17u, 50u, 200u}) {
    const auto ds = make_dataset(n);
    for (double r : {0.5, 0.7, 0.9}) {
      const std::size_t expect = static_cast<std::size_t>(std::floor(r * n));
      if (expect == 0 || expect == n) {
        CHECK_THROWS_AS(split(ds, r, 3), std::invalid_argument);
        continue;
      }
      auto [sel, val] = split(ds, r, 3);
      CHECK(sel.n_samples() == expect);
      CHECK(val.n_samples() == n - expect);
      std::set<std::string> ids(sel.song_ids.begin(), sel.song_ids.end());
      for (const auto& id : val.song_ids) CHECK(ids.insert(id).second);
      CHECK(ids.size() == n);
    }
  }
}

TEST_CASE("generate_synthetic with zero noise is exactly linear") {
  SyntheticSpec spec;
  spec.n_samples = 80;
  spec.n_informative = 10;
  spec.n_noise = 50;
  spec.noise_sigma = 0.0;
  auto [ds, informative] = generate_synthetic(spec, 5);
  CHECK(informative.size() == 10);
  CHECK(ds.n_features() == 60);

  // least-squares residual oracle: solve on the informative columns by normal
  // equations via Gaussian elimination and check a near-zero residual
  const std::size_t p = informative.size();
  std::vector<std::vector<double>> ata(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b)
      for (std::size_t i = 0; i < ds.n_samples(); ++i)
        ata[a][b] += ds.X(i, informative[a]) * ds.X(i, informative[b]);
    for (std::size_t i = 0; i < ds.n_samples(); ++i)
      ata[a][p] += ds.X(i, informative[a]) * ds.valence[i];
  }
  for (std::size_t c = 0; c < p; ++c) {  // elimination with partial pivot
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r)
      if (std::abs(ata[r][c]) > std::abs(ata[piv][c])) piv = r;
    std::swap(ata[c], ata[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c || ata[c][c] == 0.0) continue;
      const double f = ata[r][c] / ata[c][c];
      for (std::size_t k = c; k <= p; ++k) ata[r][k] -= f * ata[c][k];
    }
  }
  std::vector<double> coef(p);
  for (std::size_t c = 0; c < p; ++c) coef[c] = ata[c][p] / ata[c][c];
  double residual = 0.0;
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    double pred = 0.0;
    for (std::size_t c = 0; c < p; ++c) pred += coef[c] * ds.X(i, informative[c]);
    residual += (ds.valence[i] - pred) * (ds.valence[i] - pred);
  }
  CHECK(residual < 1e-18);
}

TEST_CASE("generate_synthetic seeds differ, shapes agree") {
  SyntheticSpec spec;
  spec.n_samples = 10;
  spec.n_informative = 2;
  spec.n_noise = 3;
  auto [a, ia] = generate_synthetic(spec, 1);
  auto [b, ib] = generate_synthetic(spec, 2);
  CHECK(a.X.rows == b.X.rows);
  CHECK(a.X.cols == b.X.cols);
  CHECK(a.X.data != b.X.data);
}

TEST_CASE("group_features_by_family") {
  auto single = group_features_by_family({"pcm_fftMag_mfcc_sma[1]", "pcm_fftMag_mfcc_sma[2]"});
  CHECK(single.at("pcm_fftMag_mfcc") == 2);

  auto mixed = group_features_by_family({"pcm_fftMag_mfcc_sma[1]", "mystery_feature"});
  CHECK(mixed.at("other") == 1);

  const std::vector<std::string> names = {
      "audSpec_Rfilt_sma[0]", "pcm_fftMag_spectralFlux_sma", "pcm_fftMag_mfcc_sma[3]",
      "pcm_fftMag_fband250-650_sma", "loudness_sma", "audSpec_Rfilt_sma[12]"};
  auto counts = group_features_by_family(names);
  std::size_t total = 0;
  for (const auto& [family, count] : counts) total += count;
  CHECK(total == names.size());
  CHECK(counts.at("audSpec_Rfilt_sma") == 2);
}

TEST_CASE("load_deam ingests two synthetic songs") {
  const auto dir = temp_dir() / "deam";
  fs::create_directories(dir / "features");
  // 91 frames at 0.0 .. 45.0 step 0.5; feature f1 equals the frame index
  for (const std::string id : {"10", "11"}) {
    std::string content = "frameTime;f1;f2\n";
    for (int i = 0; i <= 90; ++i) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%g;%d;%g\n", 0.5 * i, i, id == "10" ? 1.0 : 2.0);
      content += buf;
    }
    write_file(dir / "features" / (id + ".csv"), content);
  }
  std::string val = "song_id,sample_15000ms,sample_30000ms\n10,0.2,0.4\n11,-0.5,-0.5\n";
  std::string aro = "song_id,sample_15000ms,sample_30000ms\n10,0.0,0.0\n11,0.8,0.6\n";
  write_file(dir / "valence.csv", val);
  write_file(dir / "arousal.csv", aro);

  AdapterConfig adapter;
  auto result = load_deam(dir / "features", dir / "valence.csv", dir / "arousal.csv", adapter);
  CHECK(result.skipped == 0);
  CHECK(result.dataset.n_samples() == 2);
  CHECK(result.dataset.n_features() == 2);  // timestamp column excluded
  // f1 mean over frames 30..89 (t in [15, 44.5]) = (30 + 89) / 2
  CHECK(result.dataset.X(0, 0) == doctest::Approx((30.0 + 89.0) / 2.0));
  CHECK(result.dataset.valence[0] == doctest::Approx(0.3));
  CHECK(result.dataset.arousal[1] == doctest::Approx(0.7));
}

TEST_CASE("load_deam skips songs missing an annotation") {
  const auto dir = temp_dir() / "deam_skip";
  fs::create_directories(dir / "features");
  for (const std::string id : {"1", "2"}) {
    write_file(dir / "features" / (id + ".csv"),
               "frameTime;f1\n15.0;1\n16.0;2\n");
  }
  write_file(dir / "valence.csv", "song_id,sample_15000ms\n1,0.5\n");
  write_file(dir / "arousal.csv", "song_id,sample_15000ms\n1,0.5\n2,0.5\n");
  AdapterConfig adapter;
  auto result = load_deam(dir / "features", dir / "valence.csv", dir / "arousal.csv", adapter);
  CHECK(result.skipped == 1);
  CHECK(result.dataset.n_samples() == 1);
}

TEST_CASE("load_deam rejects an empty directory") {
  const auto dir = temp_dir() / "deam_empty";
  fs::create_directories(dir);
  AdapterConfig adapter;
  CHECK_THROWS_AS(load_deam(dir, dir / "v.csv", dir / "a.csv", adapter), std::runtime_error);
}
