#include <cmath>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"
#include "yseg/metrics.hpp"

using namespace yseg;
using namespace yseg::test;

TEST_CASE("confusion") {
  const LabelMap gt = random_labels(8, 8, 3, 1, 0.1);
  const ConfusionMatrix self = confusion(gt, gt, 3);
  std::uint64_t kept = 0;
  for (auto l : gt.labels) kept += l != kIgnore;
  CHECK(self.total() == kept);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (a != b) CHECK(self.at(a, b) == 0);

  const LabelMap pred = random_labels(8, 8, 3, 2);
  const ConfusionMatrix m = confusion(pred, gt, 3);
  ConfusionMatrix recount(3);
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (gt.labels[i] != kIgnore) ++recount.counts[gt.labels[i] * 3u + pred.labels[i]];
  CHECK(m == recount);

  // additivity over a disjoint split of the pixels
  LabelMap ga = gt, gb = gt;
  for (std::size_t i = 0; i < gt.size(); ++i) (i % 3 ? ga : gb).labels[i] = kIgnore;
  ConfusionMatrix sum = confusion(pred, ga, 3);
  sum += confusion(pred, gb, 3);
  CHECK(sum == m);

  CHECK_THROWS_AS(confusion(random_labels(8, 8, 4, 3), gt, 3), Error);
  CHECK_THROWS_AS(confusion(LabelMap(4, 8), gt, 3), Error);
}

TEST_CASE("miou") {
  const LabelMap gt = random_labels(8, 8, 3, 4);
  CHECK(miou(confusion(gt, gt, 3), true).mean == 1.0);

  LabelMap a(2, 2), b(2, 2);
  a.labels = {0, 0, 1, 1};
  b.labels = {1, 1, 0, 0};
  CHECK(miou(confusion(b, a, 2), true).mean == 0.0);

  SUBCASE("set-arithmetic oracle") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      const LabelMap g = random_labels(8, 8, 3, 10 + seed, 0.1);
      const LabelMap p = perturb(g, 3, 20 + seed, 0.4);
      for (bool bg : {true, false}) {
        const IouResult r = miou(confusion(p, g, 3), bg);
        double sum = 0;
        int used = 0;
        for (int c = 0; c < 3; ++c) {
          std::set<std::size_t> gi, pi;
          for (std::size_t i = 0; i < g.size(); ++i) {
            if (g.labels[i] == kIgnore) continue;
            if (g.labels[i] == c) gi.insert(i);
            if (p.labels[i] == c) pi.insert(i);
          }
          std::set<std::size_t> uni = gi;
          uni.insert(pi.begin(), pi.end());
          double inter = 0;
          for (auto i : gi) inter += pi.count(i);
          if (uni.empty()) {
            CHECK(std::isnan(r.per_class[c]));
            continue;
          }
          const double iou = inter / static_cast<double>(uni.size());
          CHECK(std::abs(r.per_class[c] - iou) < 1e-12);
          if (c == 0 && !bg) continue;
          sum += iou;
          ++used;
        }
        CHECK(std::abs(r.mean - sum / used) < 1e-12);
      }
    }
  }
  SUBCASE("relabeling both maps leaves the mean unchanged") {
    const LabelMap g = random_labels(8, 8, 4, 30);
    const LabelMap p = perturb(g, 4, 31, 0.5);
    const int perm[4] = {2, 3, 1, 0};
    LabelMap g2 = g, p2 = p;
    for (auto& l : g2.labels) l = static_cast<std::uint8_t>(perm[l]);
    for (auto& l : p2.labels) l = static_cast<std::uint8_t>(perm[l]);
    CHECK(miou(confusion(p2, g2, 4), true).mean ==
          doctest::Approx(miou(confusion(p, g, 4), true).mean).epsilon(1e-15));
  }
  SUBCASE("absent classes are excluded") {
    LabelMap g(2, 2, 0), p(2, 2, 0);
    const IouResult r = miou(confusion(p, g, 3), true);
    CHECK(r.mean == 1.0);
    CHECK(std::isnan(r.per_class[2]));
  }
}

TEST_CASE("f1_boundary") {
  SUBCASE("identical maps score 1") {
    const LabelMap g = blocky_labels(16, 16, 3, 40, 4);
    const BoundaryScore s = f1_boundary(g, g, 3, 3);
    for (int c = 0; c < 3; ++c) CHECK(s.f1[c] == 1.0);
    CHECK(s.mean_f1 == 1.0);
  }
  SUBCASE("contour offset by thickness + 1 scores 0") {
    for (int t : {1, 3, 5}) {
      LabelMap g(16, 32, 0), p(16, 32, 0);
      for (int y = 0; y < 16; ++y) {
        for (int x = 16; x < 32; ++x) g.at(y, x) = 1;
        for (int x = 16 + t + 1; x < 32; ++x) p.at(y, x) = 1;
      }
      const BoundaryScore s = f1_boundary(p, g, 2, t);
      CHECK(s.f1[0] == 0.0);
      CHECK(s.f1[1] == 0.0);
      CHECK(f1_boundary(p, g, 2, t + 1).f1[0] == 1.0);
    }
  }
  SUBCASE("all-pairs matching oracle") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const LabelMap g = seed % 2 ? blocky_labels(12, 14, 3, 50 + seed, 3) : random_labels(12, 14, 3, 50 + seed, 0.05);
      const LabelMap p = perturb(blocky_labels(12, 14, 3, 80 + seed, 2), 3, seed, 0.1);
      for (int t : {3, 5, 9, 12}) {
        const BoundaryScore s = f1_boundary(p, g, 3, t);
        for (int c = 0; c < 3; ++c) {
          const PR want = brute_pr(p, g, c, t);
          CHECK(s.precision[c] == want.p);
          CHECK(s.recall[c] == want.r);
          const double f = want.p + want.r > 0 ? 2 * want.p * want.r / (want.p + want.r) : 0.0;
          CHECK(s.f1[c] == doctest::Approx(f).epsilon(1e-15));
        }
      }
    }
  }
  SUBCASE("scores never drop as thickness grows") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const LabelMap g = blocky_labels(16, 16, 4, 100 + seed, 3);
      const LabelMap p = perturb(blocky_labels(16, 16, 4, 200 + seed, 4), 4, seed, 0.05);
      BoundaryScore prev = f1_boundary(p, g, 4, 1);
      for (int t = 2; t <= 12; ++t) {
        const BoundaryScore s = f1_boundary(p, g, 4, t);
        for (int c = 0; c < 4; ++c) {
          CHECK(s.precision[c] >= prev.precision[c]);
          CHECK(s.recall[c] >= prev.recall[c]);
          CHECK(s.f1[c] >= prev.f1[c]);
        }
        prev = s;
      }
    }
  }
  CHECK_THROWS_AS(f1_boundary(LabelMap(2, 2), LabelMap(2, 2), 2, 0), Error);
}

TEST_CASE("accumulated boundary counts pool images") {
  const LabelMap g1 = blocky_labels(12, 12, 3, 300, 3), g2 = blocky_labels(12, 12, 3, 301, 4);
  const LabelMap p1 = perturb(g1, 3, 1, 0.1), p2 = perturb(g2, 3, 2, 0.1);
  BoundaryAccumulator acc(3, 3);
  acc.add(p1, g1);
  acc.add(p2, g2);
  // pooled counts: a ratio of sums lies between the per-image ratios
  const BoundaryScore s = acc.score();
  const BoundaryScore a = f1_boundary(p1, g1, 3, 3);
  const BoundaryScore b = f1_boundary(p2, g2, 3, 3);
  for (int c = 0; c < 3; ++c) {
    CHECK(s.precision[c] >= std::min(a.precision[c], b.precision[c]) - 1e-15);
    CHECK(s.precision[c] <= std::max(a.precision[c], b.precision[c]) + 1e-15);
    CHECK(s.recall[c] >= std::min(a.recall[c], b.recall[c]) - 1e-15);
    CHECK(s.recall[c] <= std::max(a.recall[c], b.recall[c]) + 1e-15);
  }
}

TEST_CASE("report layout") {
  const LabelMap g = blocky_labels(16, 16, 3, 5, 4);
  const IouResult iou = miou(confusion(g, g, 3), true);
  std::vector<BoundaryScore> scores{f1_boundary(g, g, 3, 3), f1_boundary(g, g, 3, 5)};
  std::ostringstream out;
  write_report(out, iou, scores);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 3 + 1);
  CHECK(lines[0].rfind("class\tiou\t", 0) == 0);
  CHECK(lines.back().rfind("mean\t", 0) == 0);
  for (const std::string& l : lines) CHECK(std::count(l.begin(), l.end(), '\t') == 1 + 3 * 2);
}
