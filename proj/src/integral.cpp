#include "yseg/integral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "yseg/error.hpp"
#include "yseg/rng.hpp"

namespace yseg {

IntegralTable integral_table(const WeightMap& weights) {
  IntegralTable t;
  t.height = weights.height;
  t.width = weights.width;
  const int stride = t.width + 1;
  t.table.assign(static_cast<std::size_t>(t.height + 1) * stride, 0.0);
  for (int y = 0; y < t.height; ++y) {
    double row = 0.0;
    for (int x = 0; x < t.width; ++x) {
      row += weights.at(y, x);
      t.table[static_cast<std::size_t>(y + 1) * stride + x + 1] =
          t.table[static_cast<std::size_t>(y) * stride + x + 1] + row;
    }
  }
  return t;
}

double rect_sum(const IntegralTable& t, const CropRegion& r) {
  require(r.y >= 0 && r.x >= 0 && r.h >= 0 && r.w >= 0 && r.y + r.h <= t.height &&
              r.x + r.w <= t.width,
          ErrorCode::invalid_argument,
          "rect_sum: region (" + std::to_string(r.y) + "," + std::to_string(r.x) + "," +
              std::to_string(r.h) + "," + std::to_string(r.w) + ") outside " +
              std::to_string(t.height) + "x" + std::to_string(t.width));
  return t.at(r.y + r.h, r.x + r.w) - t.at(r.y, r.x + r.w) - t.at(r.y + r.h, r.x) + t.at(r.y, r.x);
}

CropRegion best_crop(const IntegralTable& t, int h, int w, std::uint64_t rng_seed) {
  require(h >= 1 && w >= 1 && h <= t.height && w <= t.width, ErrorCode::invalid_argument,
          "best_crop: crop " + std::to_string(h) + "x" + std::to_string(w) +
              " larger than image " + std::to_string(t.height) + "x" + std::to_string(t.width));
  const int ny = t.height - h + 1, nx = t.width - w + 1;
  std::vector<double> sums(static_cast<std::size_t>(ny) * nx);
  double best = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const double s = rect_sum(t, {y, x, h, w});
      sums[static_cast<std::size_t>(y) * nx + x] = s;
      best = std::max(best, s);
    }
  }
  const double tol = 1e-9 * std::max(std::abs(best), 1e-300);
  std::vector<std::size_t> ties;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (best - sums[i] <= tol) ties.push_back(i);
  }
  Rng rng(rng_seed);
  const std::size_t pick = ties[rng.below(ties.size())];
  return {static_cast<int>(pick / nx), static_cast<int>(pick % nx), h, w};
}

}  // namespace yseg
