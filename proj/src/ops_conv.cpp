#include <algorithm>
#include <vector>

#include "yseg/error.hpp"
#include "yseg/ops.hpp"

namespace yseg {

int conv_out_size(int in, int kernel, int stride, int dilation, int padding) {
  const int span = dilation * (kernel - 1) + 1;
  const int numer = in + 2 * padding - span;
  if (numer < 0) return 0;
  return numer / stride + 1;
}

namespace {

// Geometry of one sliding-window pass over a C×H×W image.
struct Window {
  int channels, height, width;
  int kh, kw;
  int stride, dilation, padding;
  int out_h, out_w;

  int rows() const { return channels * kh * kw; }
  int cols() const { return out_h * out_w; }
  bool trivial() const {
    return kh == 1 && kw == 1 && stride == 1 && padding == 0 && out_h == height &&
           out_w == width;
  }
};

template <class T>
void im2col(const T* img, const Window& g, T* col) {
  const int n_cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        T* row = col + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * n_cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.padding + ki * g.dilation;
          T* dst = row + oy * g.out_w;
          if (iy < 0 || iy >= g.height) {
            std::fill(dst, dst + g.out_w, T(0));
            continue;
          }
          const T* src = img + (static_cast<std::size_t>(c) * g.height + iy) * g.width;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.padding + kj * g.dilation;
            dst[ox] = (ix >= 0 && ix < g.width) ? src[ix] : T(0);
          }
        }
      }
    }
  }
}

template <class T>
void col2im(const T* col, const Window& g, T* img) {
  const int n_cols = g.cols();
  for (int c = 0; c < g.channels; ++c) {
    for (int ki = 0; ki < g.kh; ++ki) {
      for (int kj = 0; kj < g.kw; ++kj) {
        const T* row = col + static_cast<std::size_t>((c * g.kh + ki) * g.kw + kj) * n_cols;
        for (int oy = 0; oy < g.out_h; ++oy) {
          const int iy = oy * g.stride - g.padding + ki * g.dilation;
          if (iy < 0 || iy >= g.height) continue;
          T* dst = img + (static_cast<std::size_t>(c) * g.height + iy) * g.width;
          const T* src = row + oy * g.out_w;
          for (int ox = 0; ox < g.out_w; ++ox) {
            const int ix = ox * g.stride - g.padding + kj * g.dilation;
            if (ix >= 0 && ix < g.width) dst[ix] += src[ox];
          }
        }
      }
    }
  }
}

// C[M×N] += A[M×K] · B[K×N]
template <class T>
void gemm_nn(int m, int n, int k, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i) {
    T* ci = c + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const T av = a[static_cast<std::size_t>(i) * k + p];
      if (av == T(0)) continue;
      const T* bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

// C[M×N] += A[M×K] · B[N×K]^T
template <class T>
void gemm_nt(int m, int n, int k, const T* a, const T* b, T* c) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<std::size_t>(i) * k;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<std::size_t>(j) * k;
      T acc = T(0);
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[static_cast<std::size_t>(i) * n + j] += acc;
    }
  }
}

// C[M×N] += A[K×M]^T · B[K×N]
template <class T>
void gemm_tn(int m, int n, int k, const T* a, const T* b, T* c) {
  for (int p = 0; p < k; ++p) {
    const T* bp = b + static_cast<std::size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const T av = a[static_cast<std::size_t>(p) * m + i];
      if (av == T(0)) continue;
      T* ci = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride,
              int dilation, int padding, int groups) {
  require(input.rank() == 4 && weight.rank() == 4, ErrorCode::shape,
          "conv2d: expected rank-4 input and weight, got " + shape_str(input.shape()) +
              " and " + shape_str(weight.shape()));
  require(stride >= 1 && dilation >= 1 && padding >= 0 && groups >= 1,
          ErrorCode::invalid_argument, "conv2d: invalid stride/dilation/padding/groups");
  check_same_precision("conv2d", input, weight);
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  const int cout = weight.dim(0), cin_g = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  if (cin % groups != 0 || cout % groups != 0 || cin / groups != cin_g) {
    throw_shape_mismatch("conv2d (input vs weight channels)", input.shape(), weight.shape());
  }
  if (bias.defined()) {
    check_same_precision("conv2d", input, bias);
    if (bias.numel() != static_cast<std::size_t>(cout)) {
      throw_shape_mismatch("conv2d (bias)", bias.shape(), weight.shape());
    }
  }
  const int oh = conv_out_size(h, kh, stride, dilation, padding);
  const int ow = conv_out_size(w, kw, stride, dilation, padding);
  require(oh >= 1 && ow >= 1, ErrorCode::shape,
          "conv2d: empty output for input " + shape_str(input.shape()) + " and kernel " +
              shape_str(weight.shape()));

  const Window g{cin_g, h, w, kh, kw, stride, dilation, padding, oh, ow};
  const int cout_g = cout / groups;
  const std::size_t in_plane = static_cast<std::size_t>(h) * w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  const std::size_t w_group = static_cast<std::size_t>(cout_g) * g.rows();

  Tensor out = Tensor::zeros({n, cout, oh, ow}, input.precision());
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const T* x = input.data<T>().data();
    const T* wt = weight.data<T>().data();
    T* y = out.data<T>().data();
    std::vector<T> col(g.trivial() ? 0 : static_cast<std::size_t>(g.rows()) * g.cols());
    for (int b = 0; b < n; ++b) {
      for (int gi = 0; gi < groups; ++gi) {
        const T* img = x + (static_cast<std::size_t>(b) * cin + gi * cin_g) * in_plane;
        const T* cols = img;
        if (!g.trivial()) {
          im2col(img, g, col.data());
          cols = col.data();
        }
        T* dst = y + (static_cast<std::size_t>(b) * cout + gi * cout_g) * out_plane;
        if (bias.defined()) {
          const auto bs = bias.data<T>();
          for (int o = 0; o < cout_g; ++o) {
            std::fill(dst + o * out_plane, dst + (o + 1) * out_plane, bs[gi * cout_g + o]);
          }
        }
        gemm_nn(cout_g, g.cols(), g.rows(), wt + gi * w_group, cols, dst);
      }
    }
  });

  if (autograd::needs_grad({&input, &weight, &bias})) {
    std::vector<Tensor> inputs{input, weight};
    if (bias.defined()) inputs.push_back(bias);
    autograd::attach(out, "conv2d", inputs, [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const T* dy = o.grad<T>().data();
        const T* x = input.data<T>().data();
        const T* wt = weight.data<T>().data();
        const bool need_x = input.requires_grad();
        const bool need_w = weight.requires_grad();
        if (bias.defined() && bias.requires_grad()) {
          auto& db = bias.impl().grad<T>();
          for (int b = 0; b < n; ++b) {
            for (int c = 0; c < cout; ++c) {
              const T* p = dy + (static_cast<std::size_t>(b) * cout + c) * out_plane;
              T acc = T(0);
              for (std::size_t i = 0; i < out_plane; ++i) acc += p[i];
              db[c] += acc;
            }
          }
        }
        if (!need_x && !need_w) return;
        T* dx = need_x ? input.impl().grad<T>().data() : nullptr;
        T* dw = need_w ? weight.impl().grad<T>().data() : nullptr;
        std::vector<T> col(g.trivial() ? 0 : static_cast<std::size_t>(g.rows()) * g.cols());
        std::vector<T> dcol(g.trivial() ? 0 : col.size());
        for (int b = 0; b < n; ++b) {
          for (int gi = 0; gi < groups; ++gi) {
            const std::size_t in_off = (static_cast<std::size_t>(b) * cin + gi * cin_g) * in_plane;
            const T* dyg = dy + (static_cast<std::size_t>(b) * cout + gi * cout_g) * out_plane;
            if (need_w) {
              const T* cols = x + in_off;
              if (!g.trivial()) {
                im2col(x + in_off, g, col.data());
                cols = col.data();
              }
              gemm_nt(cout_g, g.rows(), g.cols(), dyg, cols, dw + gi * w_group);
            }
            if (need_x) {
              if (g.trivial()) {
                gemm_tn(g.rows(), g.cols(), cout_g, wt + gi * w_group, dyg, dx + in_off);
              } else {
                std::fill(dcol.begin(), dcol.end(), T(0));
                gemm_tn(g.rows(), g.cols(), cout_g, wt + gi * w_group, dyg, dcol.data());
                col2im(dcol.data(), g, dx + in_off);
              }
            }
          }
        }
      });
    });
  }
  return out;
}

Tensor conv_transpose2d(const Tensor& input, const Tensor& weight, int stride, int padding) {
  require(input.rank() == 4 && weight.rank() == 4, ErrorCode::shape,
          "conv_transpose2d: expected rank-4 input and weight, got " +
              shape_str(input.shape()) + " and " + shape_str(weight.shape()));
  require(stride >= 1 && padding >= 0, ErrorCode::invalid_argument,
          "conv_transpose2d: stride must be >= 1 and padding >= 0");
  check_same_precision("conv_transpose2d", input, weight);
  const int n = input.dim(0), cin = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (weight.dim(0) != cin) {
    throw_shape_mismatch("conv_transpose2d (input vs weight channels)", input.shape(),
                         weight.shape());
  }
  const int cout = weight.dim(1), kh = weight.dim(2), kw = weight.dim(3);
  const int oh = (h - 1) * stride - 2 * padding + kh;
  const int ow = (w - 1) * stride - 2 * padding + kw;
  require(oh >= 1 && ow >= 1, ErrorCode::shape,
          "conv_transpose2d: empty output for input " + shape_str(input.shape()));

  // The adjoint conv maps the Cout×oh×ow output image to the h×w input grid.
  const Window g{cout, oh, ow, kh, kw, stride, 1, padding, h, w};
  require(conv_out_size(oh, kh, stride, 1, padding) == h, ErrorCode::internal,
          "conv_transpose2d: inconsistent geometry");
  const std::size_t in_plane = static_cast<std::size_t>(h) * w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;

  Tensor out = Tensor::zeros({n, cout, oh, ow}, input.precision());
  dispatch(input.precision(), [&]<class T>(std::type_identity<T>) {
    const T* x = input.data<T>().data();
    const T* wt = weight.data<T>().data();
    T* y = out.data<T>().data();
    std::vector<T> col(static_cast<std::size_t>(g.rows()) * g.cols());
    for (int b = 0; b < n; ++b) {
      std::fill(col.begin(), col.end(), T(0));
      gemm_tn(g.rows(), g.cols(), cin, wt, x + b * cin * in_plane, col.data());
      col2im(col.data(), g, y + b * cout * out_plane);
    }
  });

  if (autograd::needs_grad({&input, &weight})) {
    autograd::attach(out, "conv_transpose2d", {input, weight}, [=](TensorImpl& o) {
      dispatch(o.precision, [&]<class T>(std::type_identity<T>) {
        const T* dy = o.grad<T>().data();
        const T* x = input.data<T>().data();
        const T* wt = weight.data<T>().data();
        std::vector<T> dcol(static_cast<std::size_t>(g.rows()) * g.cols());
        for (int b = 0; b < n; ++b) {
          im2col(dy + b * cout * out_plane, g, dcol.data());
          if (input.requires_grad()) {
            gemm_nn(cin, g.cols(), g.rows(), wt, dcol.data(),
                    input.impl().grad<T>().data() + b * cin * in_plane);
          }
          if (weight.requires_grad()) {
            gemm_nt(cin, g.rows(), g.cols(), x + b * cin * in_plane, dcol.data(),
                    weight.impl().grad<T>().data());
          }
        }
      });
    });
  }
  return out;
}

}  // namespace yseg
