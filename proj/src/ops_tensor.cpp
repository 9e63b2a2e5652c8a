#include <algorithm>
#include <cmath>
#include <vector>

#include "yseg/error.hpp"
#include "yseg/ops.hpp"

namespace yseg {

namespace {

void require_rank4(const char* op, const Tensor& t) {
  require(t.rank() == 4, ErrorCode::shape,
          std::string(op) + ": expected rank-4 tensor, got " + shape_str(t.shape()));
}

}  // namespace

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Tensor parts[] = {a, b};
  return concat_channels(parts);
}

Tensor concat_channels(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorCode::invalid_argument, "concat_channels: no inputs");
  const Tensor& first = parts[0];
  require_rank4("concat_channels", first);
  int total = 0;
  for (const Tensor& p : parts) {
    require_rank4("concat_channels", p);
    check_same_precision("concat_channels", first, p);
    if (p.dim(0) != first.dim(0) || p.dim(2) != first.dim(2) || p.dim(3) != first.dim(3)) {
      throw_shape_mismatch("concat_channels", first.shape(), p.shape());
    }
    total += p.dim(1);
  }
  const int n = first.dim(0);
  const std::size_t plane = static_cast<std::size_t>(first.dim(2)) * first.dim(3);
  Tensor out = Tensor::zeros({n, total, first.dim(2), first.dim(3)}, first.precision());
  dispatch(first.precision(), [&]<class T>(std::type_identity<T>) {
    T* y = out.data<T>().data();
    for (int b = 0; b < n; ++b) {
      std::size_t off = static_cast<std::size_t>(b) * total * plane;
      for (const Tensor& p : parts) {
        const std::size_t len = p.dim(1) * plane;
        const T* src = p.data<T>().data() + b * len;
        std::copy(src, src + len, y + off);
        off += len;
      }
    }
  });

  bool any = false;
  for (const Tensor& p : parts) any = any || autograd::needs_grad({&p});
  if (any) {
    std::vector<Tensor> inputs(parts.begin(), parts.end());
    autograd::attach(out, "concat_channels", inputs, [inputs, n, total, plane](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        std::size_t ch_off = 0;
        for (const Tensor& p : inputs) {
          const std::size_t len = p.dim(1) * plane;
          if (p.requires_grad()) {
            auto& dx = p.impl().grad<T>();
            for (int b = 0; b < n; ++b) {
              const T* src = dy.data() + static_cast<std::size_t>(b) * total * plane + ch_off;
              T* dst = dx.data() + b * len;
              for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
            }
          }
          ch_off += len;
        }
      });
    });
  }
  return out;
}

Tensor slice_channels(const Tensor& x, int from, int to) {
  require_rank4("slice_channels", x);
  require(0 <= from && from < to && to <= x.dim(1), ErrorCode::shape,
          "slice_channels: range [" + std::to_string(from) + ", " + std::to_string(to) +
              ") outside " + shape_str(x.shape()));
  const int n = x.dim(0), c = x.dim(1), k = to - from;
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out = Tensor::zeros({n, k, x.dim(2), x.dim(3)}, x.precision());
  dispatch(x.precision(), [&]<class T>(std::type_identity<T>) {
    for (int b = 0; b < n; ++b) {
      const T* src = x.data<T>().data() + (static_cast<std::size_t>(b) * c + from) * plane;
      std::copy(src, src + k * plane, out.data<T>().data() + b * k * plane);
    }
  });
  if (autograd::needs_grad({&x})) {
    autograd::attach(out, "slice_channels", {x}, [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = x.impl().grad<T>();
        for (int b = 0; b < n; ++b) {
          T* dst = dx.data() + (static_cast<std::size_t>(b) * c + from) * plane;
          const T* src = dy.data() + b * k * plane;
          for (std::size_t i = 0; i < k * plane; ++i) dst[i] += src[i];
        }
      });
    });
  }
  return out;
}

Tensor repeat_channels(const Tensor& x, int repeats) {
  require_rank4("repeat_channels", x);
  require(repeats >= 1, ErrorCode::invalid_argument, "repeat_channels: repeats must be >= 1");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out = Tensor::zeros({n, c * repeats, x.dim(2), x.dim(3)}, x.precision());
  dispatch(x.precision(), [&]<class T>(std::type_identity<T>) {
    const T* src = x.data<T>().data();
    T* dst = out.data<T>().data();
    for (int b = 0; b < n; ++b) {
      for (int ch = 0; ch < c; ++ch) {
        const T* s = src + (static_cast<std::size_t>(b) * c + ch) * plane;
        for (int r = 0; r < repeats; ++r) {
          std::copy(s, s + plane,
                    dst + ((static_cast<std::size_t>(b) * c + ch) * repeats + r) * plane);
        }
      }
    }
  });
  if (autograd::needs_grad({&x})) {
    autograd::attach(out, "repeat_channels", {x}, [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = x.impl().grad<T>();
        for (int b = 0; b < n; ++b) {
          for (int ch = 0; ch < c; ++ch) {
            T* d = dx.data() + (static_cast<std::size_t>(b) * c + ch) * plane;
            for (int r = 0; r < repeats; ++r) {
              const T* g = dy.data() + ((static_cast<std::size_t>(b) * c + ch) * repeats + r) * plane;
              for (std::size_t i = 0; i < plane; ++i) d[i] += g[i];
            }
          }
        }
      });
    });
  }
  return out;
}

namespace {

// Index map for the singleton-channel broadcast: element i of the wide
// operand pairs with element narrow_index(i) of the narrow operand.
struct Broadcast {
  bool active = false;
  std::size_t plane = 0;
  int channels = 0;

  std::size_t narrow_index(std::size_t i) const {
    if (!active) return i;
    const std::size_t per_image = plane * channels;
    return (i / per_image) * plane + (i % plane);
  }
};

}  // namespace

Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b) {
  check_same_precision("elementwise", a, b);
  if (kind == Elementwise::scalar_add) {
    require(b.numel() == 1, ErrorCode::shape,
            "elementwise scalar_add: expected one-element operand, got " + shape_str(b.shape()));
    Tensor out = Tensor::zeros(a.shape(), a.precision());
    dispatch(a.precision(), [&]<class T>(std::type_identity<T>) {
      const auto x = a.data<T>();
      const T s = b.data<T>()[0];
      auto y = out.data<T>();
      for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + s;
    });
    if (autograd::needs_grad({&a, &b})) {
      autograd::attach(out, "scalar_add", {a, b}, [a, b](TensorImpl& o) {
        dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
          const auto& dy = o.grad<T>();
          if (a.requires_grad()) {
            auto& dx = a.impl().grad<T>();
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
          }
          if (b.requires_grad()) {
            T acc = T(0);
            for (T v : dy) acc += v;
            b.impl().grad<T>()[0] += acc;
          }
        });
      });
    }
    return out;
  }

  // Which side (if any) is the singleton-channel operand.
  const Tensor* wide = &a;
  const Tensor* narrow = &b;
  Broadcast bc;
  if (a.shape() != b.shape()) {
    const bool ok4 = a.rank() == 4 && b.rank() == 4 && a.dim(0) == b.dim(0) &&
                     a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3) &&
                     (a.dim(1) == 1 || b.dim(1) == 1);
    if (!ok4) throw_shape_mismatch("elementwise", a.shape(), b.shape());
    if (a.dim(1) == 1) std::swap(wide, narrow);
    bc.active = true;
    bc.plane = static_cast<std::size_t>(a.dim(2)) * a.dim(3);
    bc.channels = wide->dim(1);
  }
  const bool a_is_wide = wide == &a;

  Tensor out = Tensor::zeros(wide->shape(), a.precision());
  dispatch(a.precision(), [&]<class T>(std::type_identity<T>) {
    const auto w = wide->data<T>();
    const auto nr = narrow->data<T>();
    auto y = out.data<T>();
    for (std::size_t i = 0; i < y.size(); ++i) {
      const T av = a_is_wide ? w[i] : nr[bc.narrow_index(i)];
      const T bv = a_is_wide ? nr[bc.narrow_index(i)] : w[i];
      switch (kind) {
        case Elementwise::add: y[i] = av + bv; break;
        case Elementwise::sub: y[i] = av - bv; break;
        case Elementwise::mul: y[i] = av * bv; break;
        case Elementwise::scalar_add: break;
      }
    }
  });

  if (autograd::needs_grad({&a, &b})) {
    autograd::attach(out, "elementwise", {a, b}, [a, b, kind, bc, a_is_wide](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        const auto av = a.data<T>();
        const auto bv = b.data<T>();
        auto a_idx = [&](std::size_t i) { return a_is_wide ? i : bc.narrow_index(i); };
        auto b_idx = [&](std::size_t i) { return a_is_wide ? bc.narrow_index(i) : i; };
        if (a.requires_grad()) {
          auto& da = a.impl().grad<T>();
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const T g = kind == Elementwise::mul ? dy[i] * bv[b_idx(i)] : dy[i];
            da[a_idx(i)] += g;
          }
        }
        if (b.requires_grad()) {
          auto& db = b.impl().grad<T>();
          for (std::size_t i = 0; i < dy.size(); ++i) {
            T g = dy[i];
            if (kind == Elementwise::mul) g = dy[i] * av[a_idx(i)];
            if (kind == Elementwise::sub) g = -dy[i];
            db[b_idx(i)] += g;
          }
        }
      });
    });
  }
  return out;
}

Tensor scalar_add(const Tensor& x, double s) {
  return elementwise(Elementwise::scalar_add, x, Tensor::scalar(s, x.precision()));
}

Tensor scale(const Tensor& x, double s) {
  Tensor out = Tensor::zeros(x.shape(), x.precision());
  dispatch(x.precision(), [&]<class T>(std::type_identity<T>) {
    const auto v = x.data<T>();
    auto y = out.data<T>();
    for (std::size_t i = 0; i < v.size(); ++i) y[i] = static_cast<T>(s) * v[i];
  });
  if (autograd::needs_grad({&x})) {
    autograd::attach(out, "scale", {x}, [x, s](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = x.impl().grad<T>();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += static_cast<T>(s) * dy[i];
      });
    });
  }
  return out;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank4("global_avg_pool", x);
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t plane = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor out = Tensor::zeros({n, c, 1, 1}, x.precision());
  dispatch(x.precision(), [&]<class T>(std::type_identity<T>) {
    const auto v = x.data<T>();
    auto y = out.data<T>();
    for (int p = 0; p < n * c; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < plane; ++i) s += v[p * plane + i];
      y[p] = static_cast<T>(s / static_cast<double>(plane));
    }
  });
  if (autograd::needs_grad({&x})) {
    autograd::attach(out, "global_avg_pool", {x}, [x, n, c, plane](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = x.impl().grad<T>();
        for (int p = 0; p < n * c; ++p) {
          const T g = static_cast<T>(dy[p] / static_cast<double>(plane));
          for (std::size_t i = 0; i < plane; ++i) dx[p * plane + i] += g;
        }
      });
    });
  }
  return out;
}

namespace {

Tensor scaled_sum(const Tensor& x, double factor, const char* name) {
  Tensor out = Tensor::zeros({1}, x.precision());
  dispatch(x.precision(), [&]<class T>(std::type_identity<T>) {
    double s = 0.0;
    for (T v : x.data<T>()) s += v;
    out.data<T>()[0] = static_cast<T>(s * factor);
  });
  if (autograd::needs_grad({&x})) {
    autograd::attach(out, name, {x}, [x, factor](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const T g = static_cast<T>(o.grad<T>()[0] * factor);
        for (T& d : x.impl().grad<T>()) d += g;
      });
    });
  }
  return out;
}

}  // namespace

Tensor sum(const Tensor& x) { return scaled_sum(x, 1.0, "sum"); }

Tensor mean(const Tensor& x) {
  return scaled_sum(x, 1.0 / static_cast<double>(x.numel()), "mean");
}

Tensor weighted_bce_with_logits(const Tensor& logits, const Tensor& target, const Tensor& weight,
                                double denom) {
  if (logits.shape() != target.shape()) {
    throw_shape_mismatch("weighted_bce_with_logits (target)", logits.shape(), target.shape());
  }
  if (logits.shape() != weight.shape()) {
    throw_shape_mismatch("weighted_bce_with_logits (weight)", logits.shape(), weight.shape());
  }
  check_same_precision("weighted_bce_with_logits", logits, target);
  check_same_precision("weighted_bce_with_logits", logits, weight);
  require(denom > 0, ErrorCode::invalid_argument, "weighted_bce_with_logits: denom must be > 0");

  Tensor out = Tensor::zeros({1}, logits.precision());
  dispatch(logits.precision(), [&]<class T>(std::type_identity<T>) {
    const auto z = logits.data<T>();
    const auto t = target.data<T>();
    const auto w = weight.data<T>();
    double acc = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (w[i] == T(0)) continue;
      const double zi = z[i];
      const double l = std::max(zi, 0.0) - zi * t[i] + std::log1p(std::exp(-std::abs(zi)));
      acc += w[i] * l;
    }
    out.data<T>()[0] = static_cast<T>(acc / denom);
  });
  if (autograd::needs_grad({&logits})) {
    autograd::attach(out, "weighted_bce_with_logits", {logits},
                     [logits, target, weight, denom](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const double g = o.grad<T>()[0] / denom;
        const auto z = logits.data<T>();
        const auto t = target.data<T>();
        const auto w = weight.data<T>();
        auto& dz = logits.impl().grad<T>();
        for (std::size_t i = 0; i < z.size(); ++i) {
          const double zi = z[i];
          const double s = zi >= 0 ? 1.0 / (1.0 + std::exp(-zi))
                                   : std::exp(zi) / (1.0 + std::exp(zi));
          dz[i] += static_cast<T>(g * w[i] * (s - t[i]));
        }
      });
    });
  }
  return out;
}

}  // namespace yseg
