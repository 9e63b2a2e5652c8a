#pragma once

#include <cstdint>
#include <optional>

#include "yseg/boundary.hpp"
#include "yseg/fusion.hpp"
#include "yseg/nonboundary.hpp"

namespace yseg {

struct ModelConfig {
  int num_classes = 4;
  BackboneConfig backbone;
  AsppConfig aspp;
  bool use_decoder = false;
  /// Ablation switches. Both off gives the plain baseline (final = CSS);
  /// boundary stream without the gate sums CSS and SB.
  bool boundary_stream = true;
  bool fusion_gate = true;
  int boundary_channels = 16;
  double k = 1.0;
  int upsample_channels = 16;
  int fusion_channels = 8;
  FusionAttention attention = FusionAttention::sigmoid;
  Precision precision = Precision::standard;
};

void validate(const ModelConfig& cfg);

struct YOutput {
  FeaturePyramid pyramid;
  Tensor css;
  BoundaryFeatures s;
  Tensor nabla_f5;
  Tensor upsampled;
  Tensor f_edges;
  Tensor sb;
  Tensor l_adapt;
  Tensor css_prime;
  Tensor a_map;
  Tensor final;
};

/// Two-stream segmenter: backbone + ASPP + CSS head (non-boundary stream),
/// gate cascade + semantic boundary detection (boundary stream), joined by
/// the semantic fusion gate.
class YModel {
 public:
  YModel(const ModelConfig& cfg, std::uint64_t init_seed);

  YOutput forward(const Tensor& image, Mode mode);

  /// Every persistent tensor in a fixed order (parameters and buffers).
  NamedTensors named_tensors() const;
  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;

  const ModelConfig& config() const { return cfg_; }
  Backbone& backbone() { return backbone_; }
  Aspp& aspp() { return aspp_; }
  CssHead& css_head() { return head_; }
  BoundaryDetector* boundary_detector() { return detector_ ? &*detector_ : nullptr; }
  FusionBoundary* fusion_boundary() { return fusion_boundary_ ? &*fusion_boundary_ : nullptr; }
  SbdAttention* sbd_attention() { return sbd_ ? &*sbd_ : nullptr; }
  FusionGate* fusion_gate() { return gate_ ? &*gate_ : nullptr; }

 private:
  ModelConfig cfg_;
  Initializer init_;
  Backbone backbone_;
  Aspp aspp_;
  CssHead head_;
  std::optional<BoundaryDetector> detector_;
  std::optional<FusionBoundary> fusion_boundary_;
  std::optional<SbdAttention> sbd_;
  std::optional<FusionGate> gate_;
};

}  // namespace yseg
