#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mer/rng.hpp"

namespace mer {

struct FoldPlan {
  std::size_t k = 0;
  std::vector<std::size_t> assignments;  // fold index per sample, 0..k-1
  std::uint64_t seed = 0;

  std::vector<std::size_t> test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] == fold) out.push_back(i);
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
      if (assignments[i] != fold) out.push_back(i);
    return out;
  }
};

// Seeded shuffle then contiguous chunking; the first (n mod k) folds take
// ceil(n/k) elements.
inline FoldPlan kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > n) throw std::invalid_argument("kfold_partition: need 2 <= k <= n");
  Rng rng(seed);
  auto order = shuffled_indices(n, rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  const std::size_t base = n / k, extra = n % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t t = 0; t < size; ++t) plan.assignments[order[pos++]] = f;
  }
  return plan;
}

}  // namespace mer
