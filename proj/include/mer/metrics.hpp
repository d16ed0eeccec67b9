#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mer {

struct R2Result {
  double value = 0.0;
  bool zero_variance = false;  // truth had zero variance; value forced to 0
};

// Coefficient of determination, 1 - SS_res / SS_tot.
// Zero-variance truth returns 0 with the flag set.
inline R2Result r2_score_flagged(const std::vector<double>& y_true,
                                 const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw std::invalid_argument("r2_score: length mismatch or empty input");
  double mean = 0.0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_true[i] - y_pred[i];
    const double t = y_true[i] - mean;
    ss_res += r * r;
    ss_tot += t * t;
  }
  if (ss_tot == 0.0) return {0.0, true};
  return {1.0 - ss_res / ss_tot, false};
}

inline double r2_score(const std::vector<double>& y_true,
                       const std::vector<double>& y_pred) {
  return r2_score_flagged(y_true, y_pred).value;
}

// Mean absolute deviation of y from a scalar mu.
inline double mae(const std::vector<double>& y, double mu) {
  if (y.empty()) throw std::invalid_argument("mae: empty input");
  double s = 0.0;
  for (double v : y) s += std::abs(v - mu);
  return s / static_cast<double>(y.size());
}

// Elementwise mean absolute error between two vectors.
inline double mae(const std::vector<double>& y_true, const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw std::invalid_argument("mae: length mismatch or empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) s += std::abs(y_true[i] - y_pred[i]);
  return s / static_cast<double>(y_true.size());
}

inline double mean_squared_error(const std::vector<double>& y_true,
                                 const std::vector<double>& y_pred) {
  if (y_true.empty() || y_true.size() != y_pred.size())
    throw std::invalid_argument("mean_squared_error: length mismatch or empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double r = y_true[i] - y_pred[i];
    s += r * r;
  }
  return s / static_cast<double>(y_true.size());
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Population standard deviation.
inline double fold_std(const std::vector<double>& scores) {
  if (scores.empty()) throw std::invalid_argument("fold_std: empty input");
  const double m = mean_of(scores);
  double s = 0.0;
  for (double x : scores) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(scores.size()));
}

}  // namespace mer
