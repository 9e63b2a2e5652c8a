#include "yseg/nn.hpp"

#include <algorithm>
#include <cmath>

#include "yseg/error.hpp"

namespace yseg {

Tensor Initializer::kaiming(const Shape& shape, int fan_in) {
  Tensor t = Tensor::zeros(shape, precision_);
  const double std = std::sqrt(2.0 / std::max(fan_in, 1));
  for (std::size_t i = 0; i < t.numel(); ++i) t.set_value(i, std * rng_.normal());
  return t;
}

Tensor Initializer::normal(const Shape& shape, double std) {
  Tensor t = Tensor::zeros(shape, precision_);
  for (std::size_t i = 0; i < t.numel(); ++i) t.set_value(i, std * rng_.normal());
  return t;
}

Conv2d::Conv2d(Initializer& init, int in_channels, int out_channels, int kernel, ConvOptions o)
    : opt(o) {
  require(in_channels % o.groups == 0 && out_channels % o.groups == 0,
          ErrorCode::invalid_argument, "Conv2d: channels not divisible by groups");
  const int cin_g = in_channels / o.groups;
  const Shape shape{out_channels, cin_g, kernel, kernel};
  weight = o.init_std > 0 ? init.normal(shape, o.init_std)
                          : init.kaiming(shape, cin_g * kernel * kernel);
  weight.set_requires_grad(true);
  if (o.bias) {
    bias = init.zeros({out_channels});
    bias.set_requires_grad(true);
  }
}

Tensor Conv2d::operator()(const Tensor& x) const {
  return conv2d(x, weight, bias, opt.stride, opt.dilation, opt.padding, opt.groups);
}

void Conv2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.push_back({prefix + ".weight", weight, true});
  if (bias.defined()) out.push_back({prefix + ".bias", bias, true});
}

ConvTranspose2d::ConvTranspose2d(Initializer& init, int in_channels, int out_channels,
                                 int kernel, int stride_, int padding_)
    : stride(stride_), padding(padding_) {
  // Each output pixel sees about in·(k/stride)² taps.
  const int taps = std::max(1, in_channels * (kernel / stride_) * (kernel / stride_));
  weight = init.kaiming({in_channels, out_channels, kernel, kernel}, taps);
  weight.set_requires_grad(true);
}

Tensor ConvTranspose2d::operator()(const Tensor& x) const {
  return conv_transpose2d(x, weight, stride, padding);
}

void ConvTranspose2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.push_back({prefix + ".weight", weight, true});
}

BatchNorm2d::BatchNorm2d(Initializer& init, int channels) {
  gamma = init.ones({channels});
  beta = init.zeros({channels});
  gamma.set_requires_grad(true);
  beta.set_requires_grad(true);
  state.running_mean = init.zeros({channels});
  state.running_var = init.ones({channels});
}

Tensor BatchNorm2d::operator()(const Tensor& x, Mode mode) {
  return batchnorm2d(x, gamma, beta, state, mode);
}

void BatchNorm2d::collect(const std::string& prefix, NamedTensors& out) const {
  out.push_back({prefix + ".gamma", gamma, true});
  out.push_back({prefix + ".beta", beta, true});
  out.push_back({prefix + ".running_mean", state.running_mean, false});
  out.push_back({prefix + ".running_var", state.running_var, false});
}

ConvBnRelu::ConvBnRelu(Initializer& init, int in_channels, int out_channels, int kernel,
                       ConvOptions opt, bool relu_)
    : relu(relu_) {
  opt.bias = false;
  conv = Conv2d(init, in_channels, out_channels, kernel, opt);
  bn = BatchNorm2d(init, out_channels);
}

Tensor ConvBnRelu::operator()(const Tensor& x, Mode mode) {
  Tensor y = bn(conv(x), mode);
  return relu ? yseg::relu(y) : y;
}

void ConvBnRelu::collect(const std::string& prefix, NamedTensors& out) const {
  conv.collect(prefix + ".conv", out);
  bn.collect(prefix + ".bn", out);
}

ResidualBlock::ResidualBlock(Initializer& init, int channels)
    : first(init, channels, channels, 3, {.padding = 1}),
      second(init, channels, channels, 3, {.padding = 1}, false) {}

Tensor ResidualBlock::operator()(const Tensor& x, Mode mode) {
  return relu(add(second(first(x, mode), mode), x));
}

void ResidualBlock::collect(const std::string& prefix, NamedTensors& out) const {
  first.collect(prefix + ".first", out);
  second.collect(prefix + ".second", out);
}

}  // namespace yseg
