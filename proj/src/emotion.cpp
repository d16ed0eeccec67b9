#include "mer/emotion.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace mer {
namespace {

void check_point(const VaPoint& p) {
  if (!std::isfinite(p.valence) || !std::isfinite(p.arousal) || std::abs(p.valence) > 1.0 ||
      std::abs(p.arousal) > 1.0)
    throw std::invalid_argument("VaPoint outside the unit box");
}

std::size_t quadrant_index(const VaPoint& p) {
  if (p.valence >= 0.0 && p.arousal >= 0.0) return 0;
  if (p.valence < 0.0 && p.arousal >= 0.0) return 1;
  if (p.valence < 0.0 && p.arousal < 0.0) return 2;
  return 3;
}

}  // namespace

std::string to_string(QuadrantLabel q) {
  switch (q) {
    case QuadrantLabel::Q1_happy_excited: return "Q1_happy_excited";
    case QuadrantLabel::Q2_angry_afraid: return "Q2_angry_afraid";
    case QuadrantLabel::Q3_sad_depressed: return "Q3_sad_depressed";
    case QuadrantLabel::Q4_calm_content: return "Q4_calm_content";
  }
  throw std::logic_error("unreachable");
}

QuadrantLabel quadrant_of(const VaPoint& p) {
  check_point(p);
  switch (quadrant_index(p)) {
    case 0: return QuadrantLabel::Q1_happy_excited;
    case 1: return QuadrantLabel::Q2_angry_afraid;
    case 2: return QuadrantLabel::Q3_sad_depressed;
    default: return QuadrantLabel::Q4_calm_content;
  }
}

std::string hevner_cluster_of(const VaPoint& p, const HevnerLayout& layout) {
  check_point(p);
  if (layout.angular) {
    if (p.valence == 0.0 && p.arousal == 0.0)
      throw std::invalid_argument("hevner_cluster_of: origin has no direction in angular mode");
    double deg = std::atan2(p.arousal, p.valence) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    auto sector = static_cast<std::size_t>(deg / 45.0);
    if (sector > 7) sector = 7;  // deg == 360 after rounding
    return layout.labels[sector];
  }
  // Rectangular mode: within a quadrant the arousal-adjacent cluster wins iff
  // |A| > b2 and |V| < b1.
  const std::size_t q = quadrant_index(p);
  const bool arousal_side = std::abs(p.arousal) > layout.b2 && std::abs(p.valence) < layout.b1;
  // Arousal-adjacent sector per quadrant (counterclockwise labeling): 1, 2, 5, 6.
  static constexpr std::size_t arousal_sector[4] = {1, 2, 5, 6};
  static constexpr std::size_t valence_sector[4] = {0, 3, 4, 7};
  return layout.labels[arousal_side ? arousal_sector[q] : valence_sector[q]];
}

CategorizeResult categorize_dataset(
    const std::vector<std::pair<std::string, VaPoint>>& annotations, CategorizeMode mode,
    const HevnerLayout& layout) {
  CategorizeResult result;
  std::map<std::string, std::size_t> tally;
  std::vector<std::string> label_order;
  if (mode == CategorizeMode::Quadrant) {
    for (auto q : {QuadrantLabel::Q1_happy_excited, QuadrantLabel::Q2_angry_afraid,
                   QuadrantLabel::Q3_sad_depressed, QuadrantLabel::Q4_calm_content})
      label_order.push_back(to_string(q));
  } else {
    label_order.assign(layout.labels.begin(), layout.labels.end());
  }
  for (const auto& name : label_order) tally[name] = 0;

  for (const auto& [id, p] : annotations) {
    std::string label = (mode == CategorizeMode::Quadrant) ? to_string(quadrant_of(p))
                                                           : hevner_cluster_of(p, layout);
    ++tally[label];
    result.points.push_back({id, p, std::move(label)});
  }
  for (const auto& name : label_order) result.counts.emplace_back(name, tally[name]);
  return result;
}

}  // namespace mer
