#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "yseg/image.hpp"

namespace yseg {

struct ShapesConfig {
  int size = 64;
  int num_classes = 4;
  int shapes_per_image = 4;
  /// Class c >= 1 is drawn with probability ∝ rarity^(c-1); 1.0 is uniform.
  double rarity = 0.5;
  double noise_sigma = 0.05;
};

struct Sample {
  Image image;
  LabelMap labels;
};

/// Synthetic scene: background class 0 plus randomly placed rectangles,
/// disks and triangles in per-class colours with Gaussian noise. Later
/// shapes occlude earlier ones. Fully determined by `seed`.
Sample gen_shapes(std::uint64_t seed, const ShapesConfig& cfg);

/// Base RGB colour of a class.
std::array<float, 3> class_color(int c);

/// 1 where a non-ignore pixel has a 4-neighbour with a different non-ignore
/// label.
std::vector<std::uint8_t> contour_mask(const LabelMap& labels);

/// Plane c marks class-c pixels closer than `thickness` (Euclidean) to a
/// class-c contour pixel, so thickness 1 is the contour itself.
SemanticBoundaryMap boundary_targets(const LabelMap& labels, int thickness, int num_classes);

using ClassCounts = std::vector<std::uint64_t>;

/// Exact per-class pixel counts (ignore excluded).
ClassCounts class_frequencies(std::span<const LabelMap> labels, int num_classes);

struct WeightMap {
  int height = 0;
  int width = 0;
  std::vector<double> weights;

  double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * width + x]; }
};

/// w(p) = T / (L_present · freq(class(p))), T = Σ freq; 0 on ignore. A
/// balanced dataset gives all-ones.
WeightMap pixel_weights(const LabelMap& labels, const ClassCounts& freq);

}  // namespace yseg
