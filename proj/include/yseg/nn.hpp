#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "yseg/ops.hpp"
#include "yseg/rng.hpp"

namespace yseg {

/// A model tensor with its persistent name. Buffers (running statistics)
/// are saved with checkpoints but not optimized.
struct NamedTensor {
  std::string name;
  Tensor tensor;
  bool trainable = true;
};

using NamedTensors = std::vector<NamedTensor>;

/// Kaiming fan-in normal kernels, zero biases, unit gamma, zero beta.
class Initializer {
 public:
  Initializer(std::uint64_t seed, Precision precision) : rng_(seed), precision_(precision) {}

  Tensor kaiming(const Shape& shape, int fan_in);
  Tensor normal(const Shape& shape, double std);
  Tensor zeros(const Shape& shape) const { return Tensor::zeros(shape, precision_); }
  Tensor ones(const Shape& shape) const { return Tensor::full(shape, 1.0, precision_); }
  Precision precision() const { return precision_; }

 private:
  Rng rng_;
  Precision precision_;
};

struct ConvOptions {
  int stride = 1;
  int dilation = 1;
  int padding = 0;
  int groups = 1;
  bool bias = true;
  /// Normal(0, init_std) kernel instead of Kaiming when > 0.
  double init_std = 0;
};

/// Init scale of layers emitting class scores, so a fresh model starts near
/// zero logits.
inline constexpr double kScoreInitStd = 0.01;

struct Conv2d {
  Tensor weight;
  Tensor bias;
  ConvOptions opt;

  Conv2d() = default;
  Conv2d(Initializer& init, int in_channels, int out_channels, int kernel, ConvOptions opt = {});

  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

struct ConvTranspose2d {
  Tensor weight;
  int stride = 1;
  int padding = 0;

  ConvTranspose2d() = default;
  ConvTranspose2d(Initializer& init, int in_channels, int out_channels, int kernel, int stride,
                  int padding);

  Tensor operator()(const Tensor& x) const;
  void collect(const std::string& prefix, NamedTensors& out) const;
};

struct BatchNorm2d {
  Tensor gamma;
  Tensor beta;
  BatchNormState state;

  BatchNorm2d() = default;
  BatchNorm2d(Initializer& init, int channels);

  Tensor operator()(const Tensor& x, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;
};

/// conv (no bias) -> batchnorm -> optional relu.
struct ConvBnRelu {
  Conv2d conv;
  BatchNorm2d bn;
  bool relu = true;

  ConvBnRelu() = default;
  ConvBnRelu(Initializer& init, int in_channels, int out_channels, int kernel,
             ConvOptions opt = {}, bool relu = true);

  Tensor operator()(const Tensor& x, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;
};

/// conv3x3-bn-relu-conv3x3-bn, identity skip, relu.
struct ResidualBlock {
  ConvBnRelu first;
  ConvBnRelu second;

  ResidualBlock() = default;
  ResidualBlock(Initializer& init, int channels);

  Tensor operator()(const Tensor& x, Mode mode);
  void collect(const std::string& prefix, NamedTensors& out) const;
};

}  // namespace yseg
