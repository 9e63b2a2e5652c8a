#include "yseg/model.hpp"

#include "yseg/error.hpp"

namespace yseg {

void validate(const ModelConfig& cfg) {
  require(cfg.num_classes >= 2, ErrorCode::config, "model: num_classes must be >= 2");
  validate(cfg.backbone);
  require(cfg.boundary_channels > 0 && cfg.upsample_channels > 0 && cfg.fusion_channels > 0,
          ErrorCode::config, "model: channel counts must be positive");
  require(cfg.k >= 0, ErrorCode::config, "model: k must be >= 0");
}

namespace {

BoundaryConfig boundary_config(const ModelConfig& cfg) {
  return {cfg.num_classes, cfg.boundary_channels, cfg.k, cfg.upsample_channels};
}

}  // namespace

YModel::YModel(const ModelConfig& cfg, std::uint64_t init_seed)
    : cfg_((validate(cfg), cfg)),
      init_(init_seed, cfg.precision),
      backbone_(cfg.backbone, init_),
      aspp_(cfg.aspp, cfg.backbone.stage_channels[4], init_),
      head_({cfg.num_classes, cfg.use_decoder}, cfg.aspp.channels,
            cfg.backbone.stage_channels[1], init_) {
  if (cfg.boundary_stream) {
    const BoundaryConfig bc = boundary_config(cfg);
    detector_.emplace(bc, cfg.backbone.stage_channels, init_);
    fusion_boundary_.emplace(bc, cfg.backbone.stage_channels[4], init_);
    sbd_.emplace(bc, init_);
  }
  if (cfg.fusion_gate) {
    gate_.emplace(FusionConfig{cfg.num_classes, cfg.fusion_channels, cfg.attention}, init_);
  }
}

YOutput YModel::forward(const Tensor& image, Mode mode) {
  YOutput o;
  const int h = image.dim(2), w = image.dim(3);
  o.pyramid = backbone_.extract_features(image, mode);
  const Tensor context = aspp_(o.pyramid.level(5), mode);
  o.css = head_(context, o.pyramid, h, w, mode).css;

  if (detector_) {
    o.s = (*detector_)(o.pyramid, h, w, mode);
    o.nabla_f5 = grad_approx(o.pyramid.level(5));
    auto fb = (*fusion_boundary_)(o.nabla_f5, o.s, h, w);
    o.upsampled = fb.upsampled;
    auto sbd = (*sbd_)(fb.upsampled, fb.f_edges, mode);
    o.f_edges = sbd.f_edges;
    o.sb = sbd.sb;
    o.l_adapt = sbd.l_adapt;
  }

  if (gate_) {
    const Tensor sb = o.sb.defined() ? o.sb : Tensor::zeros(o.css.shape(), o.css.precision());
    FusionOutput f = (*gate_)(o.css, sb, mode);
    o.css_prime = f.css_prime;
    o.a_map = f.a_map;
    o.final = f.final;
  } else if (o.sb.defined()) {
    o.final = add(o.css, o.sb);
  } else {
    o.final = o.css;
  }
  return o;
}

NamedTensors YModel::named_tensors() const {
  NamedTensors out;
  backbone_.collect("backbone", out);
  aspp_.collect("aspp", out);
  head_.collect("css_head", out);
  if (detector_) {
    detector_->collect("boundary", out);
    fusion_boundary_->collect("fusion_boundary", out);
    sbd_->collect("sbd", out);
  }
  if (gate_) gate_->collect("fusion_gate", out);
  return out;
}

std::vector<Tensor> YModel::parameters() const {
  std::vector<Tensor> params;
  for (const NamedTensor& t : named_tensors()) {
    if (t.trainable) params.push_back(t.tensor);
  }
  return params;
}

std::size_t YModel::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& p : parameters()) n += p.numel();
  return n;
}

}  // namespace yseg
