#include "yseg/augment.hpp"

#include <algorithm>
#include <cmath>

#include "yseg/error.hpp"
#include "yseg/rng.hpp"

namespace yseg {

Image resize_image_bilinear(const Image& image, int out_h, int out_w) {
  if (out_h == image.height && out_w == image.width) return image;
  Image out(image.channels, out_h, out_w);
  auto src_coord = [](int d, int in, int out) {
    double s = (d + 0.5) * in / out - 0.5;
    return s < 0 ? 0.0 : s;
  };
  for (int y = 0; y < out_h; ++y) {
    const double sy = src_coord(y, image.height, out_h);
    const int y0 = std::min(static_cast<int>(sy), image.height - 1);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double fy = sy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double sx = src_coord(x, image.width, out_w);
      const int x0 = std::min(static_cast<int>(sx), image.width - 1);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double fx = sx - x0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = image.at(c, y0, x0) * (1 - fx) + image.at(c, y0, x1) * fx;
        const double bot = image.at(c, y1, x0) * (1 - fx) + image.at(c, y1, x1) * fx;
        out.at(c, y, x) = static_cast<float>(top * (1 - fy) + bot * fy);
      }
    }
  }
  return out;
}

LabelMap resize_labels_nearest(const LabelMap& labels, int out_h, int out_w) {
  if (out_h == labels.height && out_w == labels.width) return labels;
  LabelMap out(out_h, out_w);
  for (int y = 0; y < out_h; ++y) {
    const int sy = std::min(static_cast<int>((y + 0.5) * labels.height / out_h), labels.height - 1);
    for (int x = 0; x < out_w; ++x) {
      const int sx = std::min(static_cast<int>((x + 0.5) * labels.width / out_w), labels.width - 1);
      out.at(y, x) = labels.at(sy, sx);
    }
  }
  return out;
}

namespace {

Sample flip_horizontal(const Sample& s) {
  Sample out = s;
  const int w = s.labels.width;
  for (int y = 0; y < s.labels.height; ++y) {
    for (int x = 0; x < w; ++x) {
      out.labels.at(y, x) = s.labels.at(y, w - 1 - x);
      for (int c = 0; c < s.image.channels; ++c) out.image.at(c, y, x) = s.image.at(c, y, w - 1 - x);
    }
  }
  return out;
}

Sample pad_to(const Sample& s, int h, int w) {
  if (s.labels.height >= h && s.labels.width >= w) return s;
  const int nh = std::max(h, s.labels.height), nw = std::max(w, s.labels.width);
  Sample out{Image(s.image.channels, nh, nw), LabelMap(nh, nw, kIgnore)};
  for (int y = 0; y < s.labels.height; ++y) {
    for (int x = 0; x < s.labels.width; ++x) {
      out.labels.at(y, x) = s.labels.at(y, x);
      for (int c = 0; c < s.image.channels; ++c) out.image.at(c, y, x) = s.image.at(c, y, x);
    }
  }
  return out;
}

Sample extract(const Sample& s, const CropRegion& r) {
  Sample out{Image(s.image.channels, r.h, r.w), LabelMap(r.h, r.w)};
  for (int y = 0; y < r.h; ++y) {
    for (int x = 0; x < r.w; ++x) {
      out.labels.at(y, x) = s.labels.at(r.y + y, r.x + x);
      for (int c = 0; c < s.image.channels; ++c) {
        out.image.at(c, y, x) = s.image.at(c, r.y + y, r.x + x);
      }
    }
  }
  return out;
}

}  // namespace

Augmented augment(const Sample& sample, const AugmentConfig& cfg, std::uint64_t seed,
                  const ClassCounts* freq) {
  Rng rng(seed);
  Augmented out;
  out.flipped = cfg.flip && rng.bernoulli(0.5);
  out.scale = cfg.scale ? rng.uniform(cfg.scale_min, cfg.scale_max) : 1.0;
  Sample s = out.flipped ? flip_horizontal(sample) : sample;
  if (cfg.scale) {
    const int nh = std::max(1, static_cast<int>(std::lround(s.labels.height * out.scale)));
    const int nw = std::max(1, static_cast<int>(std::lround(s.labels.width * out.scale)));
    s = {resize_image_bilinear(s.image, nh, nw), resize_labels_nearest(s.labels, nh, nw)};
  }
  if (cfg.mode == CropMode::none) {
    out.region = {0, 0, s.labels.height, s.labels.width};
    out.sample = std::move(s);
    return out;
  }
  require(cfg.crop_h >= 1 && cfg.crop_w >= 1, ErrorCode::invalid_argument,
          "augment: crop size must be positive");
  s = pad_to(s, cfg.crop_h, cfg.crop_w);
  const int H = s.labels.height, W = s.labels.width;
  const int max_y = H - cfg.crop_h, max_x = W - cfg.crop_w;

  CropRegion r{0, 0, cfg.crop_h, cfg.crop_w};
  switch (cfg.mode) {
    case CropMode::random:
      r.y = rng.uniform_int(0, max_y);
      r.x = rng.uniform_int(0, max_x);
      break;
    case CropMode::uniform: {
      std::vector<int> present;
      std::vector<std::uint64_t> counts(256, 0);
      for (std::uint8_t l : s.labels.labels) {
        if (l != kIgnore) ++counts[l];
      }
      for (int c = 0; c < 255; ++c) {
        if (counts[c]) present.push_back(c);
      }
      if (present.empty()) {
        r.y = rng.uniform_int(0, max_y);
        r.x = rng.uniform_int(0, max_x);
        break;
      }
      const int cls = present[rng.below(present.size())];
      std::uint64_t k = rng.below(counts[cls]);
      std::size_t idx = 0;
      for (; idx < s.labels.size(); ++idx) {
        if (s.labels.labels[idx] == cls && k-- == 0) break;
      }
      const int py = static_cast<int>(idx) / W, px = static_cast<int>(idx) % W;
      r.y = std::clamp(py - cfg.crop_h / 2, 0, max_y);
      r.x = std::clamp(px - cfg.crop_w / 2, 0, max_x);
      break;
    }
    case CropMode::integral: {
      require(freq != nullptr, ErrorCode::invalid_argument,
              "augment: integral crop needs class frequencies");
      const IntegralTable table = integral_table(pixel_weights(s.labels, *freq));
      r = best_crop(table, cfg.crop_h, cfg.crop_w, rng.bits());
      break;
    }
    case CropMode::none:
      break;
  }
  out.region = r;
  out.sample = extract(s, r);
  return out;
}

}  // namespace yseg
