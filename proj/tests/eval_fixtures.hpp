#pragma once

#include <random>

#include "docclass/dagsvm.hpp"
#include "docclass/eval.hpp"

namespace docclass::testing {

inline ConfusionMatrix table3_yuv() {
  ConfusionMatrix c;
  c.n = {{{78, 5, 11, 2, 4}, {3, 68, 0, 4, 25}, {5, 0, 94, 1, 0}, {0, 3, 3, 88, 6}, {4, 8, 1, 5, 82}}};
  return c;
}

inline ConfusionMatrix table4_lch() {
  ConfusionMatrix c;
  c.n = {{{76, 6, 12, 1, 5}, {4, 72, 0, 9, 15}, {7, 0, 92, 0, 1}, {0, 6, 0, 89, 5}, {3, 14, 1, 6, 76}}};
  return c;
}

/// Five well separated 2-d clusters. `noisy` extra points per class sit deep
/// inside the next class's cluster, so leave-one-out always misses them and
/// nothing else.
inline Dataset noisy_clusters(std::size_t per_class, std::size_t noisy, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 0.15);
  const double cx[5] = {0, 10, 0, 10, 5};
  const double cy[5] = {0, 0, 10, 10, 5};
  Dataset d;
  for (auto c : kAllClasses) {
    const auto i = class_index(c);
    for (std::size_t k = 0; k < per_class; ++k) d.push_back({{cx[i] + n(rng), cy[i] + n(rng)}, c});
    const auto host = (i + 1) % kClassCount;
    for (std::size_t k = 0; k < noisy; ++k) d.push_back({{cx[host] + n(rng), cy[host] + n(rng)}, c});
  }
  return d;
}

}  // namespace docclass::testing
