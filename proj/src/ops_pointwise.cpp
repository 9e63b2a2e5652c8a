#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "yseg/error.hpp"
#include "yseg/ops.hpp"

namespace yseg {

namespace {
thread_local KinkTrace* g_kink_trace = nullptr;
}

KinkTrace::KinkTrace() : prev_(g_kink_trace) { g_kink_trace = this; }
KinkTrace::~KinkTrace() { g_kink_trace = prev_; }
KinkTrace* KinkTrace::active() { return g_kink_trace; }

Tensor maxpool2d(const Tensor& input, int kernel, int stride, int padding) {
  require(input.rank() == 4, ErrorCode::shape,
          "maxpool2d: expected rank-4 input, got " + shape_str(input.shape()));
  require(kernel >= 1 && stride >= 1 && padding >= 0, ErrorCode::invalid_argument,
          "maxpool2d: kernel and stride must be >= 1");
  // A window made only of padding would have no real element.
  require(padding < kernel, ErrorCode::invalid_argument,
          "maxpool2d: padding must be smaller than the kernel");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int oh = conv_out_size(h, kernel, stride, 1, padding);
  const int ow = conv_out_size(w, kernel, stride, 1, padding);
  require(oh >= 1 && ow >= 1, ErrorCode::shape,
          "maxpool2d: empty output for input " + shape_str(input.shape()));

  Tensor out = Tensor::zeros({n, c, oh, ow}, input.precision());
  // Flat input index of each window's winner.
  auto argmax = std::make_shared<std::vector<std::size_t>>(out.numel());
  KinkTrace* trace = KinkTrace::active();
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const T* x = input.data<T>().data();
    T* y = out.data<T>().data();
    std::size_t o = 0;
    for (int plane = 0; plane < n * c; ++plane) {
      const std::size_t base = static_cast<std::size_t>(plane) * h * w;
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox, ++o) {
          T best = -std::numeric_limits<T>::infinity();
          std::size_t best_idx = base;
          bool found = false;
          for (int ki = 0; ki < kernel; ++ki) {
            const int iy = oy * stride - padding + ki;
            if (iy < 0 || iy >= h) continue;
            for (int kj = 0; kj < kernel; ++kj) {
              const int ix = ox * stride - padding + kj;
              if (ix < 0 || ix >= w) continue;
              const std::size_t idx = base + static_cast<std::size_t>(iy) * w + ix;
              if (!found || x[idx] > best) {
                best = x[idx];
                best_idx = idx;
                found = true;
              }
            }
          }
          require(found, ErrorCode::shape, "maxpool2d: window covers no input element");
          y[o] = best;
          (*argmax)[o] = best_idx;
          if (trace) trace->fold(best_idx);
        }
      }
    }
  });

  if (autograd::needs_grad({&input})) {
    autograd::attach(out, "maxpool2d", {input}, [input, argmax](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = input.impl().grad<T>();
        for (std::size_t i = 0; i < dy.size(); ++i) dx[(*argmax)[i]] += dy[i];
      });
    });
  }
  return out;
}

namespace {

template <class T>
T stable_sigmoid(T z) {
  // Clamped so saturation never reaches exactly 0 or 1.
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  if (z >= T(0)) return std::min(T(1) / (T(1) + std::exp(-z)), hi);
  const T e = std::exp(z);
  return std::max(e / (T(1) + e), lo);
}

}  // namespace

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out = Tensor::zeros(input.shape(), input.precision());
  if (kind == Activation::softmax_channel) {
    require(input.rank() == 4, ErrorCode::shape,
            "softmax_channel: expected rank-4 input, got " + shape_str(input.shape()));
  }
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const auto x = input.data<T>();
    auto y = out.data<T>();
    switch (kind) {
      case Activation::sigmoid:
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = stable_sigmoid(x[i]);
        break;
      case Activation::relu:
        // NaN passes through so the non-finite diagnostic can locate it.
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) || x[i] != x[i] ? x[i] : T(0);
        if (KinkTrace* trace = KinkTrace::active()) {
          std::uint64_t word = 0;
          for (std::size_t i = 0; i < x.size(); ++i) {
            word = (word << 1) | (x[i] > T(0));
            if (i % 64 == 63) trace->fold(std::exchange(word, 0));
          }
          trace->fold(word);
        }
        break;
      case Activation::softmax_channel: {
        const int n = input.dim(0), c = input.dim(1);
        const std::size_t plane = static_cast<std::size_t>(input.dim(2)) * input.dim(3);
        for (int b = 0; b < n; ++b) {
          const std::size_t base = static_cast<std::size_t>(b) * c * plane;
          for (std::size_t p = 0; p < plane; ++p) {
            T mx = x[base + p];
            for (int k = 1; k < c; ++k) mx = std::max(mx, x[base + k * plane + p]);
            double total = 0.0;
            for (int k = 0; k < c; ++k) {
              const T e = std::exp(x[base + k * plane + p] - mx);
              y[base + k * plane + p] = e;
              total += e;
            }
            for (int k = 0; k < c; ++k) {
              y[base + k * plane + p] = static_cast<T>(y[base + k * plane + p] / total);
            }
          }
        }
        break;
      }
    }
  });

  if (autograd::needs_grad({&input})) {
    const Shape shape = input.shape();
    autograd::attach(out, "activation", {input}, [input, kind, shape](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        const auto& y = o.values<T>();
        const auto x = input.data<T>();
        auto& dx = input.impl().grad<T>();
        switch (kind) {
          case Activation::sigmoid:
            for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * y[i] * (T(1) - y[i]);
            break;
          case Activation::relu:
            for (std::size_t i = 0; i < dy.size(); ++i) {
              if (x[i] > T(0)) dx[i] += dy[i];
            }
            break;
          case Activation::softmax_channel: {
            const int n = shape[0], c = shape[1];
            const std::size_t plane = static_cast<std::size_t>(shape[2]) * shape[3];
            for (int b = 0; b < n; ++b) {
              const std::size_t base = static_cast<std::size_t>(b) * c * plane;
              for (std::size_t p = 0; p < plane; ++p) {
                T dot = T(0);
                for (int k = 0; k < c; ++k) dot += dy[base + k * plane + p] * y[base + k * plane + p];
                for (int k = 0; k < c; ++k) {
                  const std::size_t i = base + k * plane + p;
                  dx[i] += y[i] * (dy[i] - dot);
                }
              }
            }
            break;
          }
        }
      });
    });
  }
  return out;
}

Tensor batchnorm2d(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                   BatchNormState& state, Mode mode) {
  require(input.rank() == 4, ErrorCode::shape,
          "batchnorm2d: expected rank-4 input, got " + shape_str(input.shape()));
  const int n = input.dim(0), c = input.dim(1);
  const std::size_t plane = static_cast<std::size_t>(input.dim(2)) * input.dim(3);
  const std::size_t count = static_cast<std::size_t>(n) * plane;
  for (const Tensor* t : std::initializer_list<const Tensor*>{&gamma, &beta, &state.running_mean, &state.running_var}) {
    if (t->numel() != static_cast<std::size_t>(c)) {
      throw_shape_mismatch("batchnorm2d (per-channel parameter)", t->shape(), input.shape());
    }
    check_same_precision("batchnorm2d", input, *t);
  }

  Tensor out = Tensor::zeros(input.shape(), input.precision());
  auto xhat = std::make_shared<std::vector<double>>(input.numel());
  auto inv_std = std::make_shared<std::vector<double>>(c);
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const auto x = input.data<T>();
    auto y = out.data<T>();
    const auto g = gamma.data<T>();
    const auto bt = beta.data<T>();
    auto rm = state.running_mean.data<T>();
    auto rv = state.running_var.data<T>();
    for (int ch = 0; ch < c; ++ch) {
      double mu, var;
      if (mode == Mode::train) {
        double s = 0.0;
        for (int b = 0; b < n; ++b) {
          const T* p = x.data() + (static_cast<std::size_t>(b) * c + ch) * plane;
          for (std::size_t i = 0; i < plane; ++i) s += p[i];
        }
        mu = s / static_cast<double>(count);
        double ss = 0.0;
        for (int b = 0; b < n; ++b) {
          const T* p = x.data() + (static_cast<std::size_t>(b) * c + ch) * plane;
          for (std::size_t i = 0; i < plane; ++i) ss += (p[i] - mu) * (p[i] - mu);
        }
        var = ss / static_cast<double>(count);
        const double unbiased = count > 1 ? ss / static_cast<double>(count - 1) : var;
        rm[ch] = static_cast<T>((1.0 - state.momentum) * rm[ch] + state.momentum * mu);
        rv[ch] = static_cast<T>((1.0 - state.momentum) * rv[ch] + state.momentum * unbiased);
      } else {
        mu = rm[ch];
        var = rv[ch];
      }
      const double is = 1.0 / std::sqrt(var + state.eps);
      (*inv_std)[ch] = is;
      for (int b = 0; b < n; ++b) {
        const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * plane;
        for (std::size_t i = 0; i < plane; ++i) {
          const double xh = (x[off + i] - mu) * is;
          (*xhat)[off + i] = xh;
          y[off + i] = static_cast<T>(g[ch] * xh + bt[ch]);
        }
      }
    }
  });

  if (autograd::needs_grad({&input, &gamma, &beta})) {
    autograd::attach(out, "batchnorm2d", {input, gamma, beta},
                     [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        const auto g = gamma.data<T>();
        for (int ch = 0; ch < c; ++ch) {
          double sdy = 0.0, sdyx = 0.0;
          for (int b = 0; b < n; ++b) {
            const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              sdy += dy[off + i];
              sdyx += dy[off + i] * (*xhat)[off + i];
            }
          }
          if (gamma.requires_grad()) gamma.impl().grad<T>()[ch] += static_cast<T>(sdyx);
          if (beta.requires_grad()) beta.impl().grad<T>()[ch] += static_cast<T>(sdy);
          if (!input.requires_grad()) continue;
          auto& dx = input.impl().grad<T>();
          const double is = (*inv_std)[ch];
          const double m = static_cast<double>(count);
          for (int b = 0; b < n; ++b) {
            const std::size_t off = (static_cast<std::size_t>(b) * c + ch) * plane;
            for (std::size_t i = 0; i < plane; ++i) {
              double v;
              if (mode == Mode::train) {
                v = g[ch] * is * (dy[off + i] - sdy / m - (*xhat)[off + i] * sdyx / m);
              } else {
                v = g[ch] * is * dy[off + i];
              }
              dx[off + i] += static_cast<T>(v);
            }
          }
        }
      });
    });
  }
  return out;
}

Tensor resize_bilinear(const Tensor& input, int out_h, int out_w) {
  require(input.rank() == 4, ErrorCode::shape,
          "resize_bilinear: expected rank-4 input, got " + shape_str(input.shape()));
  require(out_h >= 1 && out_w >= 1, ErrorCode::invalid_argument,
          "resize_bilinear: output dims must be >= 1");
  const int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (h == out_h && w == out_w) {
    // Exact copy; still differentiable through an identity node.
    Tensor out = input.detach();
    if (autograd::needs_grad({&input})) {
      autograd::attach(out, "resize_bilinear", {input}, [input](TensorImpl& o) {
        dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
          const auto& dy = o.grad<T>();
          auto& dx = input.impl().grad<T>();
          for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
        });
      });
    }
    return out;
  }

  struct Tap {
    int i0, i1;
    double frac;
  };
  auto taps = [](int in, int out) {
    std::vector<Tap> t(out);
    const double ratio = static_cast<double>(in) / out;
    for (int d = 0; d < out; ++d) {
      double src = (d + 0.5) * ratio - 0.5;
      if (src < 0) src = 0;
      int i0 = static_cast<int>(src);
      if (i0 > in - 1) i0 = in - 1;
      const int i1 = std::min(i0 + 1, in - 1);
      t[d] = {i0, i1, src - i0};
    }
    return t;
  };
  const auto ty = taps(h, out_h);
  const auto tx = taps(w, out_w);

  Tensor out = Tensor::zeros({n, c, out_h, out_w}, input.precision());
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const T* x = input.data<T>().data();
    T* y = out.data<T>().data();
    for (int p = 0; p < n * c; ++p) {
      const T* src = x + static_cast<std::size_t>(p) * h * w;
      T* dst = y + static_cast<std::size_t>(p) * out_h * out_w;
      for (int oy = 0; oy < out_h; ++oy) {
        const auto [y0, y1, fy] = ty[oy];
        for (int ox = 0; ox < out_w; ++ox) {
          const auto [x0, x1, fx] = tx[ox];
          const double top = src[y0 * w + x0] * (1 - fx) + src[y0 * w + x1] * fx;
          const double bot = src[y1 * w + x0] * (1 - fx) + src[y1 * w + x1] * fx;
          dst[oy * out_w + ox] = static_cast<T>(top * (1 - fy) + bot * fy);
        }
      }
    }
  });

  if (autograd::needs_grad({&input})) {
    autograd::attach(out, "resize_bilinear", {input}, [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const auto& dy = o.grad<T>();
        auto& dx = input.impl().grad<T>();
        for (int p = 0; p < n * c; ++p) {
          const T* g = dy.data() + static_cast<std::size_t>(p) * out_h * out_w;
          T* d = dx.data() + static_cast<std::size_t>(p) * h * w;
          for (int oy = 0; oy < out_h; ++oy) {
            const auto [y0, y1, fy] = ty[oy];
            for (int ox = 0; ox < out_w; ++ox) {
              const auto [x0, x1, fx] = tx[ox];
              const double v = g[oy * out_w + ox];
              d[y0 * w + x0] += static_cast<T>(v * (1 - fy) * (1 - fx));
              d[y0 * w + x1] += static_cast<T>(v * (1 - fy) * fx);
              d[y1 * w + x0] += static_cast<T>(v * fy * (1 - fx));
              d[y1 * w + x1] += static_cast<T>(v * fy * fx);
            }
          }
        }
      });
    });
  }
  return out;
}

}  // namespace yseg
