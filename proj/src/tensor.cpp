#include "yseg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "yseg/error.hpp"

namespace yseg {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

namespace {

std::shared_ptr<TensorImpl> make_impl(const Shape& shape, Precision p) {
  for (int d : shape) {
    require(d > 0, ErrorCode::shape, "tensor dims must be positive, got " + shape_str(shape));
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->precision = p;
  if (p == Precision::standard) {
    impl->f32.assign(numel(shape), 0.0f);
  } else {
    impl->f64.assign(numel(shape), 0.0);
  }
  return impl;
}

thread_local bool g_grad_enabled = true;

}  // namespace

Tensor Tensor::zeros(const Shape& shape, Precision p) {
  return Tensor(make_impl(shape, p));
}

Tensor Tensor::full(const Shape& shape, double value, Precision p) {
  Tensor t = zeros(shape, p);
  dispatch(p, [&]<class T>(std::type_identity<T>) {
    std::fill(t.impl_->values<T>().begin(), t.impl_->values<T>().end(), static_cast<T>(value));
  });
  return t;
}

Tensor Tensor::from(const Shape& shape, std::span<const double> values, Precision p) {
  Tensor t = zeros(shape, p);
  require(values.size() == t.numel(), ErrorCode::shape,
          "Tensor::from: " + std::to_string(values.size()) + " values for shape " +
              shape_str(shape));
  dispatch(p, [&]<class T>(std::type_identity<T>) {
    auto& v = t.impl_->values<T>();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<T>(values[i]);
  });
  return t;
}

Tensor Tensor::scalar(double value, Precision p) { return full({1}, value, p); }

double Tensor::item() const {
  require(numel() == 1, ErrorCode::shape, "item() on tensor of shape " + shape_str(shape()));
  return value(0);
}

double Tensor::value(std::size_t i) const {
  return impl_->precision == Precision::standard ? impl_->f32.at(i) : impl_->f64.at(i);
}

void Tensor::set_value(std::size_t i, double v) {
  if (impl_->precision == Precision::standard) {
    impl_->f32.at(i) = static_cast<float>(v);
  } else {
    impl_->f64.at(i) = v;
  }
}

std::vector<double> Tensor::to_vector() const {
  return dispatch(precision(), [&]<class T>(std::type_identity<T>) {
    const auto& v = impl_->values<T>();
    return std::vector<double>(v.begin(), v.end());
  });
}

Tensor& Tensor::set_requires_grad(bool on) {
  require(is_leaf(), ErrorCode::invalid_argument, "set_requires_grad on a non-leaf tensor");
  impl_->requires_grad = on;
  return *this;
}

Tensor Tensor::grad() const {
  Tensor g = zeros(shape(), precision());
  if (has_grad()) {
    dispatch(precision(), [&]<class T>(std::type_identity<T>) {
      g.impl_->values<T>() = impl_->grad<T>();
    });
  }
  return g;
}

std::vector<double> Tensor::grad_vector() const { return grad().to_vector(); }

void Tensor::zero_grad() {
  impl_->g32.clear();
  impl_->g64.clear();
}

Tensor Tensor::detach() const {
  Tensor t = zeros(shape(), precision());
  t.impl_->f32 = impl_->f32;
  t.impl_->f64 = impl_->f64;
  return t;
}

Tensor Tensor::to(Precision p) const {
  if (p == precision()) return detach();
  return from(shape(), to_vector(), p);
}

bool Tensor::all_finite() const {
  return dispatch(precision(), [&]<class T>(std::type_identity<T>) {
    const auto& v = impl_->values<T>();
    return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
  });
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

namespace autograd {

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
  if (!g_grad_enabled) return false;
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor* t) { return t && t->defined() && t->requires_grad(); });
}

void attach(Tensor& out, std::string op, std::vector<Tensor> inputs,
            std::function<void(TensorImpl&)> fn) {
  auto node = std::make_shared<GradNode>();
  node->op = std::move(op);
  node->inputs = std::move(inputs);
  node->backward = std::move(fn);
  out.impl().requires_grad = true;
  out.impl().grad_fn = std::move(node);
}

}  // namespace autograd

void check_same_precision(const char* op, const Tensor& a, const Tensor& b) {
  require(a.precision() == b.precision(), ErrorCode::invalid_argument,
          std::string(op) + ": mixed precision operands");
}

void backward(const Tensor& loss) {
  require(loss.defined() && loss.numel() == 1, ErrorCode::shape,
          "backward: loss must be scalar, got " +
              (loss.defined() ? shape_str(loss.shape()) : std::string("undefined")));
  if (!loss.requires_grad()) return;

  // Iterative post-order DFS; `order` ends up topologically sorted with
  // producers before consumers.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack;
  stack.emplace_back(&loss.impl(), 0);
  visited.insert(&loss.impl());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (node->grad_fn && next < node->grad_fn->inputs.size()) {
      const Tensor& in = node->grad_fn->inputs[next++];
      TensorImpl* child = &in.impl();
      if (in.requires_grad() && !visited.contains(child)) {
        visited.insert(child);
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (TensorImpl* t : order) {
    if (t->grad_fn) {
      t->g32.clear();
      t->g64.clear();
    }
  }
  dispatch(loss.precision(), [&]<class T>(std::type_identity<T>) {
    loss.impl().grad<T>()[0] += T(1);
  });
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorImpl* t = *it;
    if (!t->grad_fn) continue;
    dispatch(t->precision, [&]<class T>(std::type_identity<T>) { t->grad<T>(); });
    t->grad_fn->backward(*t);
  }
}

}  // namespace yseg
