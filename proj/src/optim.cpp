#include "yseg/optim.hpp"

#include <cmath>

#include "yseg/error.hpp"

namespace yseg {

void sgd_step(Tensor& param, Tensor& velocity, double lr, const SgdConfig& cfg) {
  require(lr > 0, ErrorCode::invalid_argument, "sgd_step: lr must be > 0");
  if (param.shape() != velocity.shape()) {
    throw_shape_mismatch("sgd_step (velocity)", param.shape(), velocity.shape());
  }
  dispatch(param.precision(), [&]<class T>(std::type_identity<T>) {
    auto p = param.data<T>();
    auto v = velocity.data<T>();
    const bool has_grad = param.has_grad();
    const auto& g = param.impl().grad<T>();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = has_grad ? static_cast<double>(g[i]) : 0.0;
      const double vi = cfg.momentum * v[i] + gi + cfg.weight_decay * p[i];
      v[i] = static_cast<T>(vi);
      p[i] = static_cast<T>(p[i] - lr * vi);
    }
  });
}

double poly_lr(double base_lr, long iter, long total_iter, double power) {
  require(total_iter > 0, ErrorCode::invalid_argument, "poly_lr: total_iter must be > 0");
  require(iter >= 0 && iter <= total_iter, ErrorCode::invalid_argument,
          "poly_lr: iter outside [0, total_iter]");
  return base_lr * std::pow(1.0 - static_cast<double>(iter) / total_iter, power);
}

SgdOptimizer::SgdOptimizer(std::vector<Tensor> params, SgdConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  velocity_.reserve(params_.size());
  for (const Tensor& p : params_) velocity_.push_back(Tensor::zeros(p.shape(), p.precision()));
}

void SgdOptimizer::step(double lr) {
  for (std::size_t i = 0; i < params_.size(); ++i) sgd_step(params_[i], velocity_[i], lr, cfg_);
}

void SgdOptimizer::zero_grad() {
  for (Tensor& p : params_) p.zero_grad();
}

}  // namespace yseg
