#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "yseg/tensor.hpp"

namespace yseg {

inline constexpr std::uint8_t kIgnore = 255;

/// H×W class ids in [0, L) or kIgnore.
struct LabelMap {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  LabelMap() = default;
  LabelMap(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), labels(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int y, int x) { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int y, int x) const { return labels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return labels.size(); }
  bool operator==(const LabelMap&) const = default;
};

/// C×H×W planar image with values in [0, 1].
struct Image {
  int channels = 3;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int h, int w)
      : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, 0.0f) {}

  float& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  float at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool operator==(const Image&) const = default;
};

/// L binary H×W planes.
struct SemanticBoundaryMap {
  int num_classes = 0;
  int height = 0;
  int width = 0;
  int thickness = 0;
  std::vector<std::uint8_t> planes;

  std::uint8_t at(int c, int y, int x) const {
    return planes[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
};

Tensor images_to_tensor(std::span<const Image> images, Precision p = Precision::standard);
Tensor boundaries_to_tensor(std::span<const SemanticBoundaryMap> maps,
                            Precision p = Precision::standard);
/// Per-pixel argmax over channels of an N×L×H×W tensor (ties -> lowest class).
std::vector<LabelMap> argmax_labels(const Tensor& scores);

}  // namespace yseg
