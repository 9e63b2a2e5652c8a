#pragma once

#include <vector>

#include "yseg/backbone.hpp"

namespace yseg {

struct AsppConfig {
  std::vector<int> rates{1, 2, 4};
  bool image_pooling = true;
  int channels = 32;
};

/// Multi-rate context over F5: one conv-bn-relu branch per rate (1×1 for
/// rate 1, dilated 3×3 otherwise), an optional image-pooling branch, and a
/// 1×1 projection to `channels`.
class Aspp {
 public:
  Aspp(const AsppConfig& cfg, int in_channels, Initializer& init);

  Tensor operator()(const Tensor& f5, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  std::vector<ConvBnRelu>& branches() { return branches_; }
  Conv2d& pool_conv() { return pool_conv_; }
  ConvBnRelu& projection() { return projection_; }

 private:
  AsppConfig cfg_;
  std::vector<ConvBnRelu> branches_;
  Conv2d pool_conv_;
  ConvBnRelu projection_;
};

/// Pre-activation class scores N×L×H×W at input resolution.
struct CoarseSegmentation {
  Tensor css;
};

struct CssHeadConfig {
  int num_classes = 4;
  bool use_decoder = false;
  int f2_channels = 8;
  int decoder_channels = 32;
};

class CssHead {
 public:
  CssHead(const CssHeadConfig& cfg, int context_channels, int f2_in_channels, Initializer& init);

  CoarseSegmentation operator()(const Tensor& context, const FeaturePyramid& pyramid, int out_h,
                                int out_w, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  Conv2d& classifier() { return classifier_; }

 private:
  CssHeadConfig cfg_;
  ConvBnRelu f2_proj_;
  ConvBnRelu refine_;
  Conv2d classifier_;
};

}  // namespace yseg
