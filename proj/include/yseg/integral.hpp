#pragma once

#include <cstdint>
#include <vector>

#include "yseg/data.hpp"

namespace yseg {

/// (H+1)×(W+1) summed-area table; at(y, x) = Σ weights over [0,y)×[0,x).
struct IntegralTable {
  int height = 0;
  int width = 0;
  std::vector<double> table;

  double at(int y, int x) const {
    return table[static_cast<std::size_t>(y) * (width + 1) + x];
  }
};

struct CropRegion {
  int y = 0;
  int x = 0;
  int h = 0;
  int w = 0;
  bool operator==(const CropRegion&) const = default;
};

IntegralTable integral_table(const WeightMap& weights);

/// O(1) sum over the region.
double rect_sum(const IntegralTable& table, const CropRegion& region);

/// Window of size h×w with the largest weight sum. Positions within 1e-9
/// (relative) of the maximum are tied and one is drawn uniformly with
/// `rng_seed`.
CropRegion best_crop(const IntegralTable& table, int h, int w, std::uint64_t rng_seed);

}  // namespace yseg
