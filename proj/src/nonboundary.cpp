#include "yseg/nonboundary.hpp"

#include "yseg/error.hpp"

namespace yseg {

Aspp::Aspp(const AsppConfig& cfg, int in_channels, Initializer& init) : cfg_(cfg) {
  require(!cfg.rates.empty(), ErrorCode::config, "aspp: at least one rate is required");
  require(cfg.channels > 0, ErrorCode::config, "aspp: channels must be positive");
  for (int r : cfg.rates) {
    require(r >= 1, ErrorCode::config, "aspp: rate " + std::to_string(r) + " has no receptive field");
    if (r == 1) {
      branches_.emplace_back(init, in_channels, cfg.channels, 1);
    } else {
      branches_.emplace_back(init, in_channels, cfg.channels, 3,
                             ConvOptions{.dilation = r, .padding = r});
    }
  }
  int concat = cfg.channels * static_cast<int>(cfg.rates.size());
  if (cfg.image_pooling) {
    pool_conv_ = Conv2d(init, in_channels, cfg.channels, 1);
    concat += cfg.channels;
  }
  projection_ = ConvBnRelu(init, concat, cfg.channels, 1);
}

Tensor Aspp::operator()(const Tensor& f5, Mode mode) {
  std::vector<Tensor> parts;
  for (ConvBnRelu& b : branches_) parts.push_back(b(f5, mode));
  if (cfg_.image_pooling) {
    // Pooled 1×1 response, broadcast back over the map.
    Tensor pooled = relu(pool_conv_(global_avg_pool(f5)));
    parts.push_back(resize_bilinear(pooled, f5.dim(2), f5.dim(3)));
  }
  Tensor cat = parts.size() == 1 ? parts[0] : concat_channels(parts);
  return projection_(cat, mode);
}

void Aspp::collect(const std::string& prefix, NamedTensors& out) const {
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    branches_[i].collect(prefix + ".branch" + std::to_string(i), out);
  }
  if (cfg_.image_pooling) pool_conv_.collect(prefix + ".pool", out);
  projection_.collect(prefix + ".project", out);
}

CssHead::CssHead(const CssHeadConfig& cfg, int context_channels, int f2_in_channels,
                 Initializer& init)
    : cfg_(cfg) {
  require(cfg.num_classes >= 2, ErrorCode::config, "css_head: need at least 2 classes");
  int head_in = context_channels;
  if (cfg.use_decoder) {
    f2_proj_ = ConvBnRelu(init, f2_in_channels, cfg.f2_channels, 1);
    refine_ = ConvBnRelu(init, context_channels + cfg.f2_channels, cfg.decoder_channels, 3,
                         {.padding = 1});
    head_in = cfg.decoder_channels;
  }
  classifier_ = Conv2d(init, head_in, cfg.num_classes, 1, {.init_std = kScoreInitStd});
}

CoarseSegmentation CssHead::operator()(const Tensor& context, const FeaturePyramid& pyramid,
                                       int out_h, int out_w, Mode mode) {
  Tensor x = context;
  if (cfg_.use_decoder) {
    const Tensor& f2 = pyramid.level(2);
    Tensor up = resize_bilinear(context, f2.dim(2), f2.dim(3));
    x = refine_(concat_channels(up, f2_proj_(f2, mode)), mode);
  }
  return {resize_bilinear(classifier_(x), out_h, out_w)};
}

void CssHead::collect(const std::string& prefix, NamedTensors& out) const {
  if (cfg_.use_decoder) {
    f2_proj_.collect(prefix + ".f2_proj", out);
    refine_.collect(prefix + ".refine", out);
  }
  classifier_.collect(prefix + ".classifier", out);
}

}  // namespace yseg
