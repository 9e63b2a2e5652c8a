#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace yseg {

/// standard = 32-bit storage for training; verification = 64-bit storage for
/// gradient and oracle suites.
enum class Precision : std::uint8_t { standard, verification };

using Shape = std::vector<int>;

std::size_t numel(const Shape& shape);

class Tensor;
struct TensorImpl;

struct GradNode {
  std::string op;
  std::vector<Tensor> inputs;
  // Reads out.grad and accumulates into the inputs' grads.
  std::function<void(TensorImpl& out)> backward;
};

struct TensorImpl {
  Shape shape;
  Precision precision = Precision::standard;
  std::vector<float> f32;
  std::vector<double> f64;
  std::vector<float> g32;
  std::vector<double> g64;
  bool requires_grad = false;
  std::shared_ptr<GradNode> grad_fn;

  template <class T>
  std::vector<T>& values() {
    if constexpr (std::is_same_v<T, float>) return f32;
    else return f64;
  }

  /// Gradient buffer, allocated as zeros on first use.
  template <class T>
  std::vector<T>& grad() {
    auto& g = [&]() -> std::vector<T>& {
      if constexpr (std::is_same_v<T, float>) return g32;
      else return g64;
    }();
    if (g.size() != numel(shape)) g.assign(numel(shape), T(0));
    return g;
  }

  bool has_grad() const {
    return precision == Precision::standard ? !g32.empty() : !g64.empty();
  }
};

/// Calls `f(std::type_identity<T>{})` with T = float or double per precision.
template <class F>
decltype(auto) dispatch(Precision p, F&& f) {
  if (p == Precision::standard) return f(std::type_identity<float>{});
  return f(std::type_identity<double>{});
}

/// Shared handle to an N-d row-major array that optionally participates in
/// the gradient tape. Copies alias the same storage.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, Precision p = Precision::standard);
  static Tensor full(const Shape& shape, double value, Precision p = Precision::standard);
  static Tensor from(const Shape& shape, std::span<const double> values,
                     Precision p = Precision::standard);
  static Tensor scalar(double value, Precision p = Precision::standard);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int dim(int i) const { return impl_->shape.at(static_cast<std::size_t>(i)); }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  std::size_t numel() const { return yseg::numel(impl_->shape); }
  Precision precision() const { return impl_->precision; }

  template <class T>
  std::span<T> data() {
    return impl_->values<T>();
  }
  template <class T>
  std::span<const T> data() const {
    return impl_->values<T>();
  }

  double item() const;
  double value(std::size_t i) const;
  void set_value(std::size_t i, double v);
  std::vector<double> to_vector() const;

  bool requires_grad() const { return impl_->requires_grad; }
  /// Leaves only.
  Tensor& set_requires_grad(bool on);
  bool is_leaf() const { return impl_->grad_fn == nullptr; }

  bool has_grad() const { return impl_->has_grad(); }
  /// Copy of the gradient as a plain tensor (zeros if never populated).
  Tensor grad() const;
  std::vector<double> grad_vector() const;
  void zero_grad();

  /// Graph-free copy.
  Tensor detach() const;
  Tensor to(Precision p) const;

  bool all_finite() const;

  TensorImpl& impl() const { return *impl_; }
  const std::shared_ptr<TensorImpl>& impl_ptr() const { return impl_; }

 private:
  explicit Tensor(std::shared_ptr<TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<TensorImpl> impl_;
};

bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Populates `.grad` of every requires_grad leaf reachable from `loss`.
/// Leaf gradients accumulate across calls until zeroed.
void backward(const Tensor& loss);

namespace autograd {

bool needs_grad(std::initializer_list<const Tensor*> inputs);

void attach(Tensor& out, std::string op, std::vector<Tensor> inputs,
            std::function<void(TensorImpl&)> fn);

}  // namespace autograd

void check_same_precision(const char* op, const Tensor& a, const Tensor& b);

}  // namespace yseg
