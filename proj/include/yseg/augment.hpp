#pragma once

#include <cstdint>

#include "yseg/data.hpp"
#include "yseg/integral.hpp"

namespace yseg {

/// none keeps the whole (possibly scaled) image.
enum class CropMode { random, uniform, integral, none };

struct AugmentConfig {
  CropMode mode = CropMode::integral;
  int crop_h = 64;
  int crop_w = 64;
  bool flip = true;
  bool scale = true;
  double scale_min = 0.5;
  double scale_max = 2.0;
};

struct Augmented {
  Sample sample;
  CropRegion region;  // in the flipped, scaled, padded frame
  bool flipped = false;
  double scale = 1.0;
};

Image resize_image_bilinear(const Image& image, int out_h, int out_w);
LabelMap resize_labels_nearest(const LabelMap& labels, int out_h, int out_w);

/// Horizontal flip (p = 0.5), uniform scale in [scale_min, scale_max],
/// padding to the crop size (ignore labels, zero image), then the crop chosen
/// by `cfg.mode`:
///   random   - uniform position
///   uniform  - centred on a random pixel of a class drawn uniformly from
///              those present
///   integral - maximum inverse-frequency weight sum (needs `freq`)
/// Deterministic given `seed`.
Augmented augment(const Sample& sample, const AugmentConfig& cfg, std::uint64_t seed,
                  const ClassCounts* freq = nullptr);

}  // namespace yseg
