#pragma once

#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "support.hpp"
#include "yseg/data.hpp"
#include "yseg/integral.hpp"

// Brute-force references shared by the unit and acceptance suites.
namespace yseg::test {

// All-pairs reference: label c pixel within distance < t of a class-c contour pixel.
inline std::vector<std::uint8_t> brute_boundary(const LabelMap& m, int t, int classes) {
  const int h = m.height, w = m.width;
  auto contour = [&](int y, int x) {
    const auto l = m.at(y, x);
    if (l == kIgnore) return false;
    const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int ny = y + dy[k], nx = x + dx[k];
      if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
      const auto o = m.at(ny, nx);
      if (o != kIgnore && o != l) return true;
    }
    return false;
  };
  std::vector<std::uint8_t> out(static_cast<std::size_t>(classes) * h * w, 0);
  for (int c = 0; c < classes; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (m.at(y, x) != c) continue;
        for (int qy = 0; qy < h; ++qy)
          for (int qx = 0; qx < w; ++qx) {
            if (m.at(qy, qx) != c || !contour(qy, qx)) continue;
            if ((qy - y) * (qy - y) + (qx - x) * (qx - x) < t * t) {
              out[(static_cast<std::size_t>(c) * h + y) * w + x] = 1;
            }
          }
      }
  return out;
}

inline WeightMap random_weights(int h, int w, std::uint64_t seed, bool integral) {
  Rng rng(seed);
  WeightMap m{h, w, std::vector<double>(static_cast<std::size_t>(h) * w)};
  for (double& v : m.weights) v = integral ? static_cast<double>(rng.below(10)) : rng.uniform(0, 3);
  return m;
}

inline double naive_sum(const WeightMap& m, const CropRegion& r) {
  double s = 0;
  for (int y = r.y; y < r.y + r.h; ++y)
    for (int x = r.x; x < r.x + r.w; ++x) s += m.at(y, x);
  return s;
}

struct PR {
  double p, r;
};

// All-pairs matching between contour pixel sets of one class.
inline PR brute_pr(const LabelMap& pred_in, const LabelMap& gt, int c, int t) {
  LabelMap pred = pred_in;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt.labels[i] == kIgnore) pred.labels[i] = kIgnore;
  auto contour = [](const LabelMap& m, int c, int y, int x) {
    if (m.at(y, x) != c) return false;
    const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
    for (int k = 0; k < 4; ++k) {
      const int ny = y + dy[k], nx = x + dx[k];
      if (ny < 0 || ny >= m.height || nx < 0 || nx >= m.width) continue;
      if (m.at(ny, nx) != kIgnore && m.at(ny, nx) != c) return true;
    }
    return false;
  };
  std::vector<std::pair<int, int>> ps, gs;
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x) {
      if (contour(pred, c, y, x)) ps.push_back({y, x});
      if (contour(gt, c, y, x)) gs.push_back({y, x});
    }
  auto matched = [&](const auto& from, const auto& to) {
    double m = 0;
    for (auto [y, x] : from)
      for (auto [qy, qx] : to)
        if ((y - qy) * (y - qy) + (x - qx) * (x - qx) <= t * t) {
          m += 1;
          break;
        }
    return m;
  };
  return {ps.empty() ? 1.0 : matched(ps, gs) / ps.size(), gs.empty() ? 1.0 : matched(gs, ps) / gs.size()};
}

inline LabelMap perturb(const LabelMap& m, int classes, std::uint64_t seed, double p) {
  LabelMap out = m;
  Rng rng(seed);
  for (auto& l : out.labels)
    if (l != kIgnore && rng.bernoulli(p)) l = static_cast<std::uint8_t>(rng.below(classes));
  return out;
}

// IoU of class c from explicit pixel sets (ignore pixels of gt dropped); NaN
// when the union is empty.
inline double set_iou(const LabelMap& pred, const LabelMap& gt, int c) {
  std::set<std::size_t> g, p;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (gt.labels[i] == kIgnore) continue;
    if (gt.labels[i] == c) g.insert(i);
    if (pred.labels[i] == c) p.insert(i);
  }
  std::set<std::size_t> uni = g;
  uni.insert(p.begin(), p.end());
  if (uni.empty()) return std::nan("");
  double inter = 0;
  for (auto i : g) inter += p.count(i);
  return inter / static_cast<double>(uni.size());
}

}  // namespace yseg::test
