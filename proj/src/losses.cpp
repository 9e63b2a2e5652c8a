#include "yseg/losses.hpp"

#include <algorithm>
#include <string>

#include "yseg/error.hpp"
#include "yseg/ops.hpp"

namespace yseg {

namespace {

constexpr double kWeightFloor = 1e-6;

void check_labels(std::span<const LabelMap> labels) {
  require(!labels.empty(), ErrorCode::invalid_argument, "loss: empty label batch");
  for (const LabelMap& m : labels) {
    require(m.height == labels[0].height && m.width == labels[0].width, ErrorCode::shape,
            "loss: label maps differ in size");
  }
}

}  // namespace

void validate(const LossWeights& w) {
  require(w.lambda1 >= 0 && w.lambda2 >= 0, ErrorCode::config, "loss: lambdas must be >= 0");
  require(w.lambda1 + w.lambda2 > 0, ErrorCode::config, "loss: lambda1 + lambda2 must be > 0");
  require(w.aux_weight >= 0, ErrorCode::config, "loss: aux_weight must be >= 0");
}

Tensor one_hot(std::span<const LabelMap> labels, int num_classes, Precision p) {
  check_labels(labels);
  const int n = static_cast<int>(labels.size()), h = labels[0].height, w = labels[0].width;
  std::vector<double> v(static_cast<std::size_t>(n) * num_classes * h * w, 0.0);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < plane; ++j) {
      const std::uint8_t l = labels[i].labels[j];
      if (l == kIgnore) continue;
      require(l < num_classes, ErrorCode::invalid_argument,
              "one_hot: label " + std::to_string(l) + " >= L = " + std::to_string(num_classes));
      v[(static_cast<std::size_t>(i) * num_classes + l) * plane + j] = 1.0;
    }
  }
  return Tensor::from({n, num_classes, h, w}, v, p);
}

Tensor ignore_mask(std::span<const LabelMap> labels, Precision p) {
  check_labels(labels);
  const int n = static_cast<int>(labels.size()), h = labels[0].height, w = labels[0].width;
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(n) * h * w);
  for (const LabelMap& m : labels) {
    for (std::uint8_t l : m.labels) v.push_back(l == kIgnore ? 1.0 : 0.0);
  }
  return Tensor::from({n, 1, h, w}, v, p);
}

Tensor bce_loss(const Tensor& logits, const Tensor& target, const Tensor& mask) {
  require(logits.rank() == 4, ErrorCode::shape, "bce_loss: logits must be N×L×H×W");
  if (target.shape() != logits.shape()) throw_shape_mismatch("bce_loss", logits.shape(), target.shape());
  const Shape mshape{logits.dim(0), 1, logits.dim(2), logits.dim(3)};
  if (mask.shape() != mshape) throw_shape_mismatch("bce_loss (ignore mask)", mshape, mask.shape());
  const int n = logits.dim(0), l = logits.dim(1);
  const std::size_t plane = static_cast<std::size_t>(logits.dim(2)) * logits.dim(3);
  std::vector<double> w(logits.numel());
  std::size_t kept = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < plane; ++j) {
      const bool ignored = mask.value(i * plane + j) != 0.0;
      if (!ignored) ++kept;
      for (int c = 0; c < l; ++c) {
        w[(static_cast<std::size_t>(i) * l + c) * plane + j] = ignored ? 0.0 : 1.0;
      }
    }
  }
  require(kept > 0, ErrorCode::invalid_argument, "bce_loss: every pixel is ignored");
  return weighted_bce_with_logits(logits, target, Tensor::from(logits.shape(), w, logits.precision()),
                                  static_cast<double>(kept) * l);
}

Tensor wbce_loss(const Tensor& logits, const Tensor& target, BetaMode mode, const Tensor& mask) {
  require(logits.rank() == 4, ErrorCode::shape, "wbce_loss: logits must be N×L×H×W");
  if (target.shape() != logits.shape()) throw_shape_mismatch("wbce_loss", logits.shape(), target.shape());
  const int n = logits.dim(0), l = logits.dim(1);
  const std::size_t plane = static_cast<std::size_t>(logits.dim(2)) * logits.dim(3);
  if (mask.defined()) {
    const Shape mshape{n, 1, logits.dim(2), logits.dim(3)};
    if (mask.shape() != mshape) throw_shape_mismatch("wbce_loss (ignore mask)", mshape, mask.shape());
  }
  auto ignored = [&](int i, std::size_t j) {
    return mask.defined() && mask.value(i * plane + j) != 0.0;
  };

  // counts[i][c] = {boundary, total} over non-ignored pixels
  std::vector<double> pos(static_cast<std::size_t>(n) * l, 0.0), tot(pos.size(), 0.0);
  std::size_t kept = 0;
  for (int i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < plane; ++j) {
      if (ignored(i, j)) continue;
      ++kept;
      for (int c = 0; c < l; ++c) {
        const std::size_t idx = (static_cast<std::size_t>(i) * l + c) * plane + j;
        pos[i * l + c] += target.value(idx) != 0.0 ? 1.0 : 0.0;
        tot[i * l + c] += 1.0;
      }
    }
  }
  require(kept > 0, ErrorCode::invalid_argument, "wbce_loss: every pixel is ignored");
  if (mode == BetaMode::per_batch) {
    for (int c = 0; c < l; ++c) {
      double p = 0, t = 0;
      for (int i = 0; i < n; ++i) p += pos[i * l + c], t += tot[i * l + c];
      for (int i = 0; i < n; ++i) pos[i * l + c] = p, tot[i * l + c] = t;
    }
  }

  std::vector<double> w(logits.numel(), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < l; ++c) {
      const double t = tot[i * l + c];
      const double beta = t > 0 ? (t - pos[i * l + c]) / t : 1.0;
      const double w_pos = std::max(beta, kWeightFloor), w_neg = std::max(1.0 - beta, kWeightFloor);
      for (std::size_t j = 0; j < plane; ++j) {
        if (ignored(i, j)) continue;
        const std::size_t idx = (static_cast<std::size_t>(i) * l + c) * plane + j;
        w[idx] = target.value(idx) != 0.0 ? w_pos : w_neg;
      }
    }
  }
  return weighted_bce_with_logits(logits, target, Tensor::from(logits.shape(), w, logits.precision()),
                                  static_cast<double>(kept) * l);
}

Tensor wbce_loss(const Tensor& logits, std::span<const SemanticBoundaryMap> targets, BetaMode mode) {
  return wbce_loss(logits, boundaries_to_tensor(targets, logits.precision()), mode);
}

LossTerms multi_task_loss(const Tensor& final_logits, const Tensor& sb_logits,
                          std::span<const LabelMap> seg_target, const Tensor& boundary_target,
                          const LossWeights& weights, const Tensor& css_logits) {
  validate(weights);
  const Precision p = final_logits.precision();
  const int l = final_logits.dim(1);
  const Tensor mask = ignore_mask(seg_target, p);
  LossTerms out;
  Tensor total;
  auto accumulate = [&](const Tensor& term, double lambda) {
    Tensor scaled = lambda == 1.0 ? term : scale(term, lambda);
    total = total.defined() ? add(total, scaled) : scaled;
  };
  if (weights.lambda1 > 0 && sb_logits.defined()) {
    out.boundary = wbce_loss(sb_logits, boundary_target, weights.beta_mode, mask);
    accumulate(out.boundary, weights.lambda1);
  }
  Tensor target;
  if (weights.lambda2 > 0 || (weights.aux_loss && css_logits.defined())) {
    target = one_hot(seg_target, l, p);
  }
  if (weights.lambda2 > 0) {
    out.segmentation = bce_loss(final_logits, target, mask);
    accumulate(out.segmentation, weights.lambda2);
  }
  if (weights.aux_loss && css_logits.defined() && weights.aux_weight > 0) {
    out.aux = bce_loss(css_logits, target, mask);
    accumulate(out.aux, weights.aux_weight);
  }
  require(total.defined(), ErrorCode::config, "multi_task_loss: every term is disabled");
  out.total = total;
  return out;
}

}  // namespace yseg
