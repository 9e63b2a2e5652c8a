#include "yseg/distance.hpp"

#include <algorithm>

#include "yseg/error.hpp"

namespace yseg {

namespace {

// 1-D lower envelope of parabolas (q - v)² + f[v] over the finite sites.
void envelope_1d(const std::int64_t* f, int n, std::int64_t* out, std::vector<int>& v,
                 std::vector<double>& z) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kNoSeed) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -std::numeric_limits<double>::infinity();
      z[1] = std::numeric_limits<double>::infinity();
      continue;
    }
    double s;
    while (true) {
      const int p = v[k];
      s = (static_cast<double>(f[q] + static_cast<std::int64_t>(q) * q) -
           static_cast<double>(f[p] + static_cast<std::int64_t>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k]) {
        --k;  // z[0] = -inf keeps k >= 0
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  if (k < 0) {
    std::fill(out, out + n, kNoSeed);
    return;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const std::int64_t d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(std::span<const std::uint8_t> seeds, int h,
                                                     int w) {
  require(h > 0 && w > 0 && seeds.size() == static_cast<std::size_t>(h) * w,
          ErrorCode::shape, "squared_distance_transform: seed mask does not match grid");
  const int n = std::max(h, w);
  std::vector<int> v(n);
  std::vector<double> z(n + 1);
  std::vector<std::int64_t> f(n), col(n);
  std::vector<std::int64_t> dist(seeds.size());

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = seeds[static_cast<std::size_t>(y) * w + x] ? 0 : kNoSeed;
    envelope_1d(f.data(), h, col.data(), v, z);
    for (int y = 0; y < h; ++y) dist[static_cast<std::size_t>(y) * w + x] = col[y];
  }
  for (int y = 0; y < h; ++y) {
    std::int64_t* row = dist.data() + static_cast<std::size_t>(y) * w;
    std::copy(row, row + w, f.begin());
    envelope_1d(f.data(), w, row, v, z);
  }
  return dist;
}

}  // namespace yseg
