#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "yseg/tensor.hpp"

namespace yseg {

struct GradcheckOptions {
  double step = 1e-5;
  /// Relative error is |a - n| / max(|a|, |n|, floor), where floor is the
  /// larger of `abs_floor` and `rel_floor` times the largest |n| of the whole
  /// check. The scaled part keeps roundoff in the loss (~1e-14 / 2h) from
  /// dominating entries whose gradient is many orders below the rest.
  double abs_floor = 1e-6;
  double rel_floor = 1e-3;
  /// Elements checked per input; 0 checks all of them, otherwise a seeded
  /// sample.
  std::size_t max_per_input = 0;
  std::uint64_t seed = 0;
  /// Elements whose ±step evaluations change a relu sign or max-pool winner
  /// are excluded, since the difference quotient there straddles a kink. A
  /// check fails outright when more than this fraction is excluded.
  double max_skip_fraction = 0.05;
};

struct GradientError {
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

struct GradcheckResult {
  std::string name;
  double max_rel_error = 0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
  double tolerance = 0;
  double max_skip_fraction = 0.05;
  bool passed() const {
    return max_rel_error < tolerance &&
           static_cast<double>(skipped) <= max_skip_fraction * static_cast<double>(checked + skipped);
  }
};

/// Central finite differences of `loss()` (a scalar) against reverse-mode
/// gradients for every leaf in `inputs`. Inputs must be verification-mode
/// leaves with requires_grad set.
GradientError max_gradient_error(const std::function<Tensor()>& loss,
                                 const std::vector<Tensor>& inputs, const GradcheckOptions& opt = {});

/// Σ x ⊙ R with a fixed seeded R, turning any output into a scalar with a
/// nontrivial gradient.
Tensor random_projection(const Tensor& x, std::uint64_t seed);

/// Every differentiable operator plus the stream components and the
/// multi-task loss through a compact full model, all in verification mode.
std::vector<GradcheckResult> gradcheck_suite(std::uint64_t seed = 7);

}  // namespace yseg
