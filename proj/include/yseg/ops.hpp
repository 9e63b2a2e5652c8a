#pragma once

#include <cstdint>
#include <span>

#include "yseg/tensor.hpp"

// Differentiable operators over N×C×H×W activations. Padding conventions:
// zeros for convolutions, -inf for max pooling.
namespace yseg {

enum class Mode { train, eval };

/// Output size of a strided, dilated, padded window along one axis.
int conv_out_size(int in, int kernel, int stride, int dilation, int padding);

/// `weight` is Cout×(Cin/groups)×Kh×Kw; `bias` may be undefined.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias = {},
              int stride = 1, int dilation = 1, int padding = 0, int groups = 1);

/// `weight` is Cin×Cout×K×K. Output dims (H-1)·stride - 2·padding + K.
/// Adjoint of conv2d with the same weight tensor and geometry.
Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, int stride, int padding);

/// Gradient routes to the first row-major argmax of each window.
Tensor maxpool2d(const Tensor& input, int kernel, int stride, int padding);

/// While alive, relu sign patterns and max-pool winners on this thread are
/// hashed, so finite differences can tell when a perturbation crossed a kink.
class KinkTrace {
 public:
  KinkTrace();
  ~KinkTrace();
  KinkTrace(const KinkTrace&) = delete;
  KinkTrace& operator=(const KinkTrace&) = delete;

  void reset() { hash_ = kOffset; }
  std::uint64_t hash() const { return hash_; }
  void fold(std::uint64_t v) { hash_ = (hash_ ^ v) * 0x100000001b3ULL; }
  static KinkTrace* active();

 private:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  std::uint64_t hash_ = kOffset;
  KinkTrace* prev_;
};

enum class Activation { sigmoid, relu, softmax_channel };

Tensor activation(const Tensor& input, Activation kind);
inline Tensor sigmoid(const Tensor& x) { return activation(x, Activation::sigmoid); }
inline Tensor relu(const Tensor& x) { return activation(x, Activation::relu); }
inline Tensor softmax_channel(const Tensor& x) { return activation(x, Activation::softmax_channel); }

struct BatchNormState {
  Tensor running_mean;
  Tensor running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

/// Train mode normalizes by batch statistics and updates `state`; eval mode
/// reads the running statistics.
Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, Mode mode);

/// Half-pixel (align_corners = false) bilinear resampling:
/// src = (dst + 0.5) · in/out - 0.5, clamped below at 0, upper neighbour
/// clamped to in - 1.
Tensor resize_bilinear(const Tensor& input, int out_h, int out_w);

Tensor concat_channels(const Tensor& a, const Tensor& b);
Tensor concat_channels(std::span<const Tensor> parts);
/// Channels [from, to).
Tensor slice_channels(const Tensor& x, int from, int to);
/// Each channel repeated `repeats` times consecutively (c0 c0 c0 c1 c1 c1 ...).
Tensor repeat_channels(const Tensor& x, int repeats);

enum class Elementwise { add, mul, sub, scalar_add };

/// add/mul/sub take equal shapes, or rank-4 operands where one side has a
/// single channel (broadcast across channels). scalar_add takes a
/// one-element `b`.
Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b);
inline Tensor add(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::add, a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::sub, a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return elementwise(Elementwise::mul, a, b); }
Tensor scalar_add(const Tensor& x, double s);
Tensor scale(const Tensor& x, double s);

/// N×C×H×W -> N×C×1×1.
Tensor global_avg_pool(const Tensor& x);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Σ weight·BCE(sigmoid(logits), target) / denom in the stable logits form.
/// `target` and `weight` are constants.
Tensor weighted_bce_with_logits(const Tensor& logits, const Tensor& target,
                                const Tensor& weight, double denom);

}  // namespace yseg
