#pragma once

#include <array>
#include <vector>

#include "yseg/nn.hpp"

namespace yseg {

struct BackboneConfig {
  std::array<int, 5> stage_channels{8, 16, 32, 32, 32};
  int blocks_per_stage = 1;
  int input_channels = 3;
  /// Dilations of stages 4 and 5 (stride-1 stages).
  std::array<int, 2> late_dilations{2, 4};
};

void validate(const BackboneConfig& cfg);

/// Five staged outputs F1..F5; `level(i)` is 1-based.
struct FeaturePyramid {
  std::array<Tensor, 5> levels;
  std::array<int, 5> strides{};
  std::array<int, 5> dilations{};
  std::array<int, 5> channels{};

  const Tensor& level(int i) const { return levels.at(static_cast<std::size_t>(i - 1)); }
};

/// Output stride 8: stages 1-3 downsample by 2, stages 4-5 keep resolution
/// and dilate instead.
class Backbone {
 public:
  Backbone(const BackboneConfig& cfg, Initializer& init);

  FeaturePyramid extract_features(const Tensor& image, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;
  const BackboneConfig& config() const { return cfg_; }

  struct Block {
    ConvBnRelu body;
    bool has_projection = false;
    Conv2d projection;

    Tensor operator()(const Tensor& x, Mode mode);
  };

  std::vector<std::vector<Block>>& stages() { return stages_; }

 private:
  BackboneConfig cfg_;
  std::vector<std::vector<Block>> stages_;
};

}  // namespace yseg
