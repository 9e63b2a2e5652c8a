#pragma once

#include "yseg/nn.hpp"

namespace yseg {

enum class FusionAttention { sigmoid, softmax };

struct FusionConfig {
  int num_classes = 4;
  int channels = 8;
  FusionAttention attention = FusionAttention::sigmoid;
};

struct FusionOutput {
  Tensor final;
  Tensor a_map;
  Tensor css_prime;
};

/// final = A ⊙ css' + (1 - A) ⊙ sb
Tensor blend(const Tensor& a_map, const Tensor& css_prime, const Tensor& sb);

/// Semantic fusion gate. Two conv3x3-bn-relu -> conv1x1 sets over CSS give
/// CSS' and the attention logits; A and 1 - A split the output between the
/// refined segmentation and the semantic boundary scores.
class FusionGate {
 public:
  FusionGate(const FusionConfig& cfg, Initializer& init);

  FusionOutput operator()(const Tensor& css, const Tensor& sb, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  Conv2d& attention_head() { return attn_out_; }

 private:
  FusionConfig cfg_;
  ConvBnRelu refine_in_;
  Conv2d refine_out_;
  ConvBnRelu attn_in_;
  Conv2d attn_out_;
};

}  // namespace yseg
