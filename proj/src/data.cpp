#include "yseg/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "yseg/distance.hpp"
#include "yseg/error.hpp"
#include "yseg/rng.hpp"

namespace yseg {

std::array<float, 3> class_color(int c) {
  if (c == 0) return {0.35f, 0.35f, 0.35f};
  // Golden-ratio hue walk, fixed saturation/value.
  const double hue = std::fmod(0.07 + 0.618033988749895 * (c - 1), 1.0) * 6.0;
  const int sector = static_cast<int>(hue);
  const double f = hue - sector;
  const double v = 0.9, s = 0.8;
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r, g, b;
  switch (sector % 6) {
    case 0: r = v, g = t, b = p; break;
    case 1: r = q, g = v, b = p; break;
    case 2: r = p, g = v, b = t; break;
    case 3: r = p, g = q, b = v; break;
    case 4: r = t, g = p, b = v; break;
    default: r = v, g = p, b = q; break;
  }
  return {static_cast<float>(r), static_cast<float>(g), static_cast<float>(b)};
}

namespace {

int draw_class(Rng& rng, int num_classes, double rarity) {
  double total = 0.0;
  for (int c = 1; c < num_classes; ++c) total += std::pow(rarity, c - 1);
  double u = rng.uniform() * total;
  for (int c = 1; c < num_classes; ++c) {
    u -= std::pow(rarity, c - 1);
    if (u < 0) return c;
  }
  return num_classes - 1;
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

Sample gen_shapes(std::uint64_t seed, const ShapesConfig& cfg) {
  require(cfg.num_classes >= 3, ErrorCode::invalid_argument,
          "gen_shapes: need background plus at least two shape classes");
  require(cfg.num_classes < kIgnore, ErrorCode::invalid_argument, "gen_shapes: too many classes");
  require(cfg.size >= 8, ErrorCode::invalid_argument, "gen_shapes: size must be >= 8");
  Rng rng(seed);
  const int n = cfg.size;
  LabelMap labels(n, n, 0);
  const double r_min = n / 10.0, r_max = n / 4.0;

  for (int s = 0; s < cfg.shapes_per_image; ++s) {
    const auto cls = static_cast<std::uint8_t>(draw_class(rng, cfg.num_classes, cfg.rarity));
    const int kind = static_cast<int>(rng.below(3));
    const double cx = rng.uniform(0, n), cy = rng.uniform(0, n);
    const double r = rng.uniform(r_min, r_max);
    if (kind == 0) {
      const double hw = r * rng.uniform(0.5, 1.0), hh = r * rng.uniform(0.5, 1.0);
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          if (std::abs(x + 0.5 - cx) <= hw && std::abs(y + 0.5 - cy) <= hh) labels.at(y, x) = cls;
        }
      }
    } else if (kind == 1) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          if (dx * dx + dy * dy <= r * r) labels.at(y, x) = cls;
        }
      }
    } else {
      std::array<double, 6> v{};
      const double phase = rng.uniform(0, 2 * 3.141592653589793);
      for (int i = 0; i < 3; ++i) {
        const double a = phase + i * 2.0943951023931953 + rng.uniform(-0.4, 0.4);
        const double rr = r * rng.uniform(0.7, 1.2);
        v[2 * i] = cx + rr * std::cos(a);
        v[2 * i + 1] = cy + rr * std::sin(a);
      }
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const double px = x + 0.5, py = y + 0.5;
          const double e0 = edge(v[0], v[1], v[2], v[3], px, py);
          const double e1 = edge(v[2], v[3], v[4], v[5], px, py);
          const double e2 = edge(v[4], v[5], v[0], v[1], px, py);
          if ((e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0)) {
            labels.at(y, x) = cls;
          }
        }
      }
    }
  }

  Image image(3, n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto col = class_color(labels.at(y, x));
      for (int c = 0; c < 3; ++c) {
        const double v = col[c] + cfg.noise_sigma * rng.normal();
        image.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return {std::move(image), std::move(labels)};
}

std::vector<std::uint8_t> contour_mask(const LabelMap& labels) {
  const int h = labels.height, w = labels.width;
  std::vector<std::uint8_t> mask(labels.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t l = labels.at(y, x);
      if (l == kIgnore) continue;
      const int dy[4] = {-1, 1, 0, 0}, dx[4] = {0, 0, -1, 1};
      for (int k = 0; k < 4; ++k) {
        const int ny = y + dy[k], nx = x + dx[k];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const std::uint8_t o = labels.at(ny, nx);
        if (o != kIgnore && o != l) {
          mask[static_cast<std::size_t>(y) * w + x] = 1;
          break;
        }
      }
    }
  }
  return mask;
}

SemanticBoundaryMap boundary_targets(const LabelMap& labels, int thickness, int num_classes) {
  require(thickness >= 1, ErrorCode::invalid_argument, "boundary_targets: thickness must be >= 1");
  SemanticBoundaryMap out;
  out.num_classes = num_classes;
  out.height = labels.height;
  out.width = labels.width;
  out.thickness = thickness;
  const std::size_t plane = labels.size();
  out.planes.assign(plane * num_classes, 0);
  const auto contour = contour_mask(labels);
  const std::int64_t limit = static_cast<std::int64_t>(thickness) * thickness;
  std::vector<std::uint8_t> seeds(plane);
  for (int c = 0; c < num_classes; ++c) {
    bool any = false;
    for (std::size_t i = 0; i < plane; ++i) {
      seeds[i] = contour[i] && labels.labels[i] == c;
      any = any || seeds[i];
    }
    if (!any) continue;
    const auto d2 = squared_distance_transform(seeds, labels.height, labels.width);
    for (std::size_t i = 0; i < plane; ++i) {
      if (labels.labels[i] == c && d2[i] < limit) out.planes[c * plane + i] = 1;
    }
  }
  return out;
}

ClassCounts class_frequencies(std::span<const LabelMap> labels, int num_classes) {
  require(!labels.empty(), ErrorCode::dataset, "class_frequencies: empty dataset");
  ClassCounts counts(static_cast<std::size_t>(num_classes), 0);
  std::uint64_t total = 0;
  for (const LabelMap& m : labels) {
    for (std::uint8_t l : m.labels) {
      if (l == kIgnore) continue;
      require(l < num_classes, ErrorCode::dataset,
              "class_frequencies: label " + std::to_string(l) + " >= L = " +
                  std::to_string(num_classes));
      ++counts[l];
      ++total;
    }
  }
  require(total > 0, ErrorCode::dataset, "class_frequencies: no labelled pixels");
  return counts;
}

WeightMap pixel_weights(const LabelMap& labels, const ClassCounts& freq) {
  double total = 0.0;
  int present = 0;
  for (std::uint64_t f : freq) {
    total += static_cast<double>(f);
    if (f > 0) ++present;
  }
  require(present > 0, ErrorCode::invalid_argument, "pixel_weights: empty frequency table");
  WeightMap w{labels.height, labels.width, std::vector<double>(labels.size(), 0.0)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::uint8_t l = labels.labels[i];
    if (l == kIgnore) continue;
    require(l < freq.size() && freq[l] > 0, ErrorCode::invalid_argument,
            "pixel_weights: class " + std::to_string(l) + " has zero frequency");
    w.weights[i] = total / (present * static_cast<double>(freq[l]));
  }
  return w;
}

}  // namespace yseg
