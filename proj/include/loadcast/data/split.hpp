// Train/validation/test slot split. The first train_days×8 slots are split
// into train and validation by a seeded uniform draw shared by all meters;
// everything after is the test horizon.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "loadcast/common.hpp"
#include "loadcast/rng.hpp"

namespace loadcast {

struct SplitSpec {
  std::vector<int> train_slots;
  std::vector<int> validation_slots;
  std::vector<int> test_slots;
  std::uint64_t seed = 0;
};

inline SplitSpec make_split(int total_slots, int train_days, double validation_fraction,
                            std::uint64_t seed) {
  const int pre = train_days * 8;
  if (train_days < 1 || pre > total_slots) {
    throw std::invalid_argument("make_split: train_days " + std::to_string(train_days) +
                                " needs " + std::to_string(pre) + " slots but the dataset has " +
                                std::to_string(total_slots));
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("make_split: validation fraction " +
                                detail::format_double(validation_fraction) + " outside [0, 1)");
  }

  SplitSpec spec;
  spec.seed = seed;
  const int n_val = static_cast<int>(std::llround(validation_fraction * pre));
  Rng rng(seed);
  std::vector<int> val = rng.sample_indices(pre, n_val);
  std::vector<std::uint8_t> is_val(static_cast<std::size_t>(pre), 0);
  for (int i : val) is_val[static_cast<std::size_t>(i)] = 1;

  spec.validation_slots = std::move(val);
  spec.train_slots.reserve(static_cast<std::size_t>(pre - n_val));
  for (int i = 0; i < pre; ++i) {
    if (!is_val[static_cast<std::size_t>(i)]) spec.train_slots.push_back(i);
  }
  spec.test_slots.reserve(static_cast<std::size_t>(total_slots - pre));
  for (int i = pre; i < total_slots; ++i) spec.test_slots.push_back(i);
  return spec;
}

}  // namespace loadcast
