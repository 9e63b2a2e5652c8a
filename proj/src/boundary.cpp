#include "yseg/boundary.hpp"

#include "yseg/error.hpp"

namespace yseg {

AttentionGate::AttentionGate(int feature_channels, int running_channels, double k,
                             Initializer& init)
    : k_(k),
      alpha_conv_(init, feature_channels + running_channels, 1, 1),
      gate_conv_(init, feature_channels, running_channels, 1),
      block_(init, running_channels),
      side_conv_(init, running_channels, 1, 1) {
  require(k >= 0, ErrorCode::config, "attention gate: k must be >= 0");
}

AttentionGate::Output AttentionGate::operator()(const Tensor& f_n, const Tensor& f_prime,
                                                Mode mode) {
  Tensor fp = resize_bilinear(f_prime, f_n.dim(2), f_n.dim(3));
  if (fp.dim(2) != f_n.dim(2) || fp.dim(3) != f_n.dim(3)) {
    throw_shape_mismatch("attention gate (after resize)", fp.shape(), f_n.shape());
  }
  Output o;
  o.alpha = sigmoid(alpha_conv_(concat_channels(f_n, fp)));
  o.gated = gate_conv_(mul(f_n, scalar_add(o.alpha, k_)));
  o.residual = block_(o.gated, mode);
  o.side = side_conv_(o.residual);
  return o;
}

void AttentionGate::collect(const std::string& prefix, NamedTensors& out) const {
  alpha_conv_.collect(prefix + ".alpha", out);
  gate_conv_.collect(prefix + ".gate", out);
  block_.collect(prefix + ".block", out);
  side_conv_.collect(prefix + ".side", out);
}

BoundaryDetector::BoundaryDetector(const BoundaryConfig& cfg,
                                   const std::array<int, 5>& ch, Initializer& init)
    : entry_(init, ch[0], cfg.channels, 1),
      gates_{AttentionGate(ch[2], cfg.channels, cfg.k, init),
             AttentionGate(ch[3], cfg.channels, cfg.k, init),
             AttentionGate(ch[4], cfg.channels, cfg.k, init)} {}

BoundaryFeatures BoundaryDetector::operator()(const FeaturePyramid& pyramid, int out_h, int out_w,
                                              Mode mode) {
  BoundaryFeatures out;
  Tensor running = entry_(pyramid.level(1));
  const int levels[3] = {3, 4, 5};
  for (int i = 0; i < 3; ++i) {
    auto g = gates_[i](pyramid.level(levels[i]), running, mode);
    out.s[i] = resize_bilinear(g.side, out_h, out_w);
    running = g.residual;
  }
  return out;
}

void BoundaryDetector::collect(const std::string& prefix, NamedTensors& out) const {
  entry_.collect(prefix + ".entry", out);
  for (int i = 0; i < 3; ++i) gates_[i].collect(prefix + ".gate" + std::to_string(i + 1), out);
}

Tensor grad_approx(const Tensor& f5) { return sigmoid(sub(f5, maxpool2d(f5, 3, 1, 1))); }

FusionBoundary::FusionBoundary(const BoundaryConfig& cfg, int f5_channels, Initializer& init)
    : num_classes_(cfg.num_classes),
      up1_(init, f5_channels, cfg.upsample_channels, 4, 2, 1),
      up2_(init, cfg.upsample_channels, cfg.num_classes, 8, 4, 2),
      grouped_(init, 4 * cfg.num_classes, 4 * cfg.num_classes, 1,
               {.groups = cfg.num_classes}) {
  require(cfg.num_classes >= 2, ErrorCode::config, "fusion boundary: need at least 2 classes");
}

FusionBoundary::Output FusionBoundary::operator()(const Tensor& nabla_f5,
                                                  const BoundaryFeatures& s, int out_h,
                                                  int out_w) const {
  Output o;
  o.upsampled = up2_(relu(up1_(nabla_f5)));
  if (o.upsampled.dim(2) != out_h || o.upsampled.dim(3) != out_w) {
    throw_shape_mismatch("fusion boundary (upsampled vs image)", o.upsampled.shape(),
                         {o.upsampled.dim(0), num_classes_, out_h, out_w});
  }
  std::vector<Tensor> groups;
  groups.reserve(4 * static_cast<std::size_t>(num_classes_));
  for (int k = 0; k < num_classes_; ++k) {
    groups.push_back(slice_channels(o.upsampled, k, k + 1));
    for (const Tensor& side : s.s) groups.push_back(side);
  }
  o.f_edges = grouped_(concat_channels(groups));
  return o;
}

void FusionBoundary::collect(const std::string& prefix, NamedTensors& out) const {
  up1_.collect(prefix + ".up1", out);
  up2_.collect(prefix + ".up2", out);
  grouped_.collect(prefix + ".grouped", out);
}

SbdAttention::SbdAttention(const BoundaryConfig& cfg, Initializer& init)
    : num_classes_(cfg.num_classes),
      adapt1_(init, cfg.num_classes, cfg.num_classes, 1),
      adapt2_(init, cfg.num_classes, cfg.num_classes, 1),
      classifier_(init, 4 * cfg.num_classes, cfg.num_classes, 1, {.init_std = kScoreInitStd}) {}

SemanticBoundary SbdAttention::operator()(const Tensor& upsampled, const Tensor& f_edges,
                                          Mode mode) {
  require(f_edges.dim(1) == 4 * num_classes_, ErrorCode::shape,
          "sbd attention: f_edges must have 4·L channels, got " + shape_str(f_edges.shape()));
  SemanticBoundary out;
  out.f_edges = f_edges;
  out.l_adapt = adapt2_(adapt1_(upsampled, mode), mode);
  Tensor gated = mul(repeat_channels(out.l_adapt, 4), f_edges);
  out.sb = classifier_(gated);
  return out;
}

void SbdAttention::collect(const std::string& prefix, NamedTensors& out) const {
  adapt1_.collect(prefix + ".adapt1", out);
  adapt2_.collect(prefix + ".adapt2", out);
  classifier_.collect(prefix + ".classifier", out);
}

}  // namespace yseg
