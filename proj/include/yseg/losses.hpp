#pragma once

#include <span>

#include "yseg/image.hpp"

namespace yseg {

/// Scope over which the WBCE balance factor β_c is counted.
enum class BetaMode { per_image, per_batch };

struct LossWeights {
  double lambda1 = 1.0;  // boundary term
  double lambda2 = 1.0;  // segmentation term
  BetaMode beta_mode = BetaMode::per_image;
  /// Extra BCE on the coarse segmentation scores.
  bool aux_loss = false;
  double aux_weight = 0.4;
};

void validate(const LossWeights& w);

/// N×L×H×W; ignore pixels are all-zero.
Tensor one_hot(std::span<const LabelMap> labels, int num_classes,
               Precision p = Precision::standard);

/// N×1×H×W, 1 where the label is ignore.
Tensor ignore_mask(std::span<const LabelMap> labels, Precision p = Precision::standard);

/// Mean stable-logits BCE over the elements of non-ignored pixels.
Tensor bce_loss(const Tensor& logits, const Tensor& target_onehot, const Tensor& ignore_mask);

/// Class-balanced BCE. For each class plane β_c is the non-boundary share of
/// its (non-ignored) pixels; boundary pixels weigh β_c and the rest 1 - β_c,
/// both floored at 1e-6. Mean over non-ignored elements. `ignore_mask` may be
/// undefined.
Tensor wbce_loss(const Tensor& logits, const Tensor& boundary_target, BetaMode mode,
                 const Tensor& ignore_mask = {});
Tensor wbce_loss(const Tensor& logits, std::span<const SemanticBoundaryMap> targets,
                 BetaMode mode);

struct LossTerms {
  Tensor total;
  Tensor boundary;      // undefined when the boundary term is off
  Tensor segmentation;  // undefined when lambda2 == 0
  Tensor aux;           // undefined unless aux_loss
};

/// λ1 · WBCE(sb) + λ2 · BCE(final) [+ aux_weight · BCE(css)]. A term whose
/// weight is zero, or whose logits are undefined, is skipped.
LossTerms multi_task_loss(const Tensor& final_logits, const Tensor& sb_logits,
                          std::span<const LabelMap> seg_target, const Tensor& boundary_target,
                          const LossWeights& weights, const Tensor& css_logits = {});

}  // namespace yseg
