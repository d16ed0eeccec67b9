#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace mer {

struct VaPoint {
  double valence = 0.0;  // in [-1, 1]
  double arousal = 0.0;  // in [-1, 1]
};

enum class QuadrantLabel {
  Q1_happy_excited,
  Q2_angry_afraid,
  Q3_sad_depressed,
  Q4_calm_content,
};

std::string to_string(QuadrantLabel q);

// Eight adjective-cluster labels, one per 45-degree sector counterclockwise
// from the positive-valence axis. The rectangular mode reproduces the
// boundary-box formulation: within a quadrant the arousal-dominant label wins
// iff |A| > b2 and |V| < b1.
struct HevnerLayout {
  std::array<std::string, 8> labels = {
      "happy", "excited", "afraid", "angry", "sad", "depressed", "calm", "content",
  };
  bool angular = true;
  double b1 = 0.5;
  double b2 = 0.5;
};

// Axes go to the nonnegative side; the origin lands in Q1.
QuadrantLabel quadrant_of(const VaPoint& p);

// Angular mode: sector = floor(atan2(A, V) normalized to [0, 360) / 45).
// The origin has no direction and is rejected in angular mode.
std::string hevner_cluster_of(const VaPoint& p, const HevnerLayout& layout = {});

enum class CategorizeMode { Quadrant, Hevner };

struct CategorizedPoint {
  std::string id;
  VaPoint point;
  std::string label;
};

struct CategorizeResult {
  std::vector<CategorizedPoint> points;
  std::vector<std::pair<std::string, std::size_t>> counts;  // label -> count, stable order
};

CategorizeResult categorize_dataset(const std::vector<std::pair<std::string, VaPoint>>& annotations,
                                    CategorizeMode mode, const HevnerLayout& layout = {});

}  // namespace mer
