#pragma once

#include <vector>

#include "yseg/tensor.hpp"

namespace yseg {

struct SgdConfig {
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

/// One momentum-SGD update from `param.grad()`:
///   v <- momentum·v + grad + weight_decay·param;  param <- param - lr·v
void sgd_step(Tensor& param, Tensor& velocity, double lr, const SgdConfig& cfg);

/// Polynomial decay base_lr·(1 - iter/total_iter)^power.
double poly_lr(double base_lr, long iter, long total_iter, double power = 0.9);

class SgdOptimizer {
 public:
  SgdOptimizer(std::vector<Tensor> params, SgdConfig cfg);

  void step(double lr);
  void zero_grad();

  const std::vector<Tensor>& params() const { return params_; }
  std::vector<Tensor>& velocity() { return velocity_; }
  const Tensor& velocity_at(std::size_t i) const { return velocity_.at(i); }
  const SgdConfig& config() const { return cfg_; }

 private:
  std::vector<Tensor> params_;
  std::vector<Tensor> velocity_;
  SgdConfig cfg_;
};

}  // namespace yseg
