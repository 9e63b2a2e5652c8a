#pragma once

#include <array>

#include "yseg/backbone.hpp"

namespace yseg {

struct BoundaryConfig {
  int num_classes = 4;
  /// Width of the running feature carried along the gate cascade.
  int channels = 16;
  /// Border reinforcement constant added to every gate attention map.
  double k = 1.0;
  /// Channels between the two transposed convolutions of the upsampler.
  int upsample_channels = 16;
};

/// Single-channel side outputs at full image resolution.
struct BoundaryFeatures {
  std::array<Tensor, 3> s;
};

struct SemanticBoundary {
  Tensor sb;       // N×L×H×W scores
  Tensor f_edges;  // N×4L×H×W, class k in channels 4k..4k+3
  Tensor l_adapt;  // N×L×H×W per-class attention
};

/// Local attention gate of the boundary cascade.
///   alpha = sigmoid(conv1x1(F_n || F'_n))
///   G_A   = conv1x1(F_n ⊙ (alpha + k))
/// G_A feeds a residual block (the running feature R_n) and a 1×1 conv to a
/// single-channel side map.
class AttentionGate {
 public:
  AttentionGate(int feature_channels, int running_channels, double k, Initializer& init);

  struct Output {
    Tensor alpha;     // N×1×h×w
    Tensor gated;     // G_A
    Tensor residual;  // R_n
    Tensor side;      // N×1×h×w
  };

  /// `f_prime` is resized to `f_n`'s spatial dims before entry.
  Output operator()(const Tensor& f_n, const Tensor& f_prime, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  Conv2d& alpha_conv() { return alpha_conv_; }
  Conv2d& gate_conv() { return gate_conv_; }
  double& k() { return k_; }

 private:
  double k_;
  Conv2d alpha_conv_;
  Conv2d gate_conv_;
  ResidualBlock block_;
  Conv2d side_conv_;
};

/// Cascade over F1, F3, F4, F5: R0 = conv1x1(F1); S1 = gate(F3, R0),
/// S2 = gate(F4, R1), S3 = gate(F5, R2); each S_n upsampled to out_h×out_w.
class BoundaryDetector {
 public:
  BoundaryDetector(const BoundaryConfig& cfg, const std::array<int, 5>& pyramid_channels,
                   Initializer& init);

  BoundaryFeatures operator()(const FeaturePyramid& pyramid, int out_h, int out_w, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  std::array<AttentionGate, 3>& gates() { return gates_; }

 private:
  Conv2d entry_;
  std::array<AttentionGate, 3> gates_;
};

/// sigmoid(F5 - maxpool3x3(F5)) with a stride-1, self-inclusive window, so
/// every element lies in (0, 0.5].
Tensor grad_approx(const Tensor& f5);

/// Upsamples ∇F5 ×8 (transposed convs of stride 2 then 4) to L channels,
/// pairs each class slice with S1..S3 and mixes each 4-channel group with
/// its own 1×1 weights.
class FusionBoundary {
 public:
  FusionBoundary(const BoundaryConfig& cfg, int f5_channels, Initializer& init);

  struct Output {
    Tensor upsampled;  // N×L×H×W
    Tensor f_edges;    // N×4L×H×W
  };

  Output operator()(const Tensor& nabla_f5, const BoundaryFeatures& s, int out_h, int out_w) const;
  void collect(const std::string& prefix, NamedTensors& out) const;

  ConvTranspose2d& up2() { return up2_; }
  Conv2d& grouped() { return grouped_; }

 private:
  int num_classes_;
  ConvTranspose2d up1_;
  ConvTranspose2d up2_;
  Conv2d grouped_;
};

/// L_adapt (two 1×1 conv-bn-relu blocks over the upsampled ∇F5), replicated
/// over each class group, gates F_edges; a 1×1 conv maps 4L -> L.
class SbdAttention {
 public:
  SbdAttention(const BoundaryConfig& cfg, Initializer& init);

  SemanticBoundary operator()(const Tensor& upsampled, const Tensor& f_edges, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;

  ConvBnRelu& adapt2() { return adapt2_; }

 private:
  int num_classes_;
  ConvBnRelu adapt1_;
  ConvBnRelu adapt2_;
  Conv2d classifier_;
};

}  // namespace yseg
