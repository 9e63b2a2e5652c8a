#include "yseg/backbone.hpp"

#include "yseg/error.hpp"

namespace yseg {

namespace {

constexpr std::array<int, 5> kStageStride{2, 2, 2, 1, 1};

}  // namespace

void validate(const BackboneConfig& cfg) {
  for (int c : cfg.stage_channels) {
    require(c > 0, ErrorCode::config, "backbone: stage channels must be positive");
  }
  require(cfg.blocks_per_stage > 0 && cfg.input_channels > 0, ErrorCode::config,
          "backbone: blocks_per_stage and input_channels must be positive");
  require(cfg.late_dilations[0] > 0 && cfg.late_dilations[1] > 0, ErrorCode::config,
          "backbone: dilations must be positive");
}

Tensor Backbone::Block::operator()(const Tensor& x, Mode mode) {
  Tensor skip = has_projection ? projection(x) : x;
  return add(body(x, mode), skip);
}

Backbone::Backbone(const BackboneConfig& cfg, Initializer& init) : cfg_(cfg) {
  validate(cfg);
  int in = cfg.input_channels;
  for (int s = 0; s < 5; ++s) {
    const int out = cfg.stage_channels[s];
    const int dilation = s < 3 ? 1 : cfg.late_dilations[s - 3];
    std::vector<Block> blocks;
    for (int b = 0; b < cfg.blocks_per_stage; ++b) {
      const int stride = b == 0 ? kStageStride[s] : 1;
      const int cin = b == 0 ? in : out;
      Block blk;
      blk.body = ConvBnRelu(init, cin, out, 3,
                            {.stride = stride, .dilation = dilation, .padding = dilation});
      if (cin != out || stride != 1) {
        blk.has_projection = true;
        blk.projection = Conv2d(init, cin, out, 1, {.stride = stride, .bias = false});
      }
      blocks.push_back(std::move(blk));
    }
    stages_.push_back(std::move(blocks));
    in = out;
  }
}

FeaturePyramid Backbone::extract_features(const Tensor& image, Mode mode) {
  require(image.rank() == 4 && image.dim(1) == cfg_.input_channels, ErrorCode::shape,
          "extract_features: expected N×" + std::to_string(cfg_.input_channels) +
              "×H×W image, got " + shape_str(image.shape()));
  require(image.dim(2) % 8 == 0 && image.dim(3) % 8 == 0, ErrorCode::invalid_argument,
          "extract_features: image dims must be divisible by 8, got " + shape_str(image.shape()));
  FeaturePyramid pyr;
  Tensor x = image;
  int stride = 1;
  for (int s = 0; s < 5; ++s) {
    for (Block& blk : stages_[s]) x = blk(x, mode);
    stride *= kStageStride[s];
    pyr.levels[s] = x;
    pyr.strides[s] = stride;
    pyr.dilations[s] = s < 3 ? 1 : cfg_.late_dilations[s - 3];
    pyr.channels[s] = cfg_.stage_channels[s];
  }
  return pyr;
}

void Backbone::collect(const std::string& prefix, NamedTensors& out) const {
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    for (std::size_t b = 0; b < stages_[s].size(); ++b) {
      const std::string p = prefix + ".stage" + std::to_string(s + 1) + "." + std::to_string(b);
      stages_[s][b].body.collect(p + ".body", out);
      if (stages_[s][b].has_projection) stages_[s][b].projection.collect(p + ".proj", out);
    }
  }
}

}  // namespace yseg
