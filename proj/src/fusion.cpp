#include "yseg/fusion.hpp"

#include "yseg/error.hpp"

namespace yseg {

Tensor blend(const Tensor& a_map, const Tensor& css_prime, const Tensor& sb) {
  Tensor complement = scalar_add(scale(a_map, -1.0), 1.0);
  return add(mul(a_map, css_prime), mul(complement, sb));
}

FusionGate::FusionGate(const FusionConfig& cfg, Initializer& init)
    : cfg_(cfg),
      refine_in_(init, cfg.num_classes, cfg.channels, 3, {.padding = 1}),
      refine_out_(init, cfg.channels, cfg.num_classes, 1, {.init_std = kScoreInitStd}),
      attn_in_(init, cfg.num_classes, cfg.channels, 3, {.padding = 1}),
      attn_out_(init, cfg.channels, cfg.num_classes, 1, {.init_std = kScoreInitStd}) {}

FusionOutput FusionGate::operator()(const Tensor& css, const Tensor& sb, Mode mode) {
  if (css.shape() != sb.shape()) throw_shape_mismatch("semantic_fusion", css.shape(), sb.shape());
  FusionOutput o;
  o.css_prime = refine_out_(refine_in_(css, mode));
  Tensor logits = attn_out_(attn_in_(css, mode));
  o.a_map = cfg_.attention == FusionAttention::sigmoid ? sigmoid(logits) : softmax_channel(logits);
  o.final = blend(o.a_map, o.css_prime, sb);
  return o;
}

void FusionGate::collect(const std::string& prefix, NamedTensors& out) const {
  refine_in_.collect(prefix + ".refine_in", out);
  refine_out_.collect(prefix + ".refine_out", out);
  attn_in_.collect(prefix + ".attn_in", out);
  attn_out_.collect(prefix + ".attn_out", out);
}

}  // namespace yseg
