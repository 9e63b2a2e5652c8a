#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "yseg/error.hpp"
#include "yseg/image.hpp"
#include "yseg/nn.hpp"
#include "yseg/rng.hpp"
#include "yseg/tensor.hpp"

namespace yseg::test {

inline constexpr Precision kV = Precision::verification;

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, Precision p = kV,
                            double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  std::vector<double> v(numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return Tensor::from(shape, v, p);
}

inline Tensor leaf(const Shape& shape, std::uint64_t seed, Precision p = kV) {
  Tensor t = random_tensor(shape, seed, p);
  t.set_requires_grad(true);
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  const auto x = a.to_vector(), y = b.to_vector();
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  const auto x = a.to_vector(), y = b.to_vector();
  double m = 0;
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

inline Tensor find_tensor(const NamedTensors& named, const std::string& name) {
  for (const NamedTensor& t : named) {
    if (t.name == name) return t.tensor;
  }
  throw Error(ErrorCode::invalid_argument, "no tensor named " + name);
}

inline void fill(Tensor t, double v) {
  for (std::size_t i = 0; i < t.numel(); ++i) t.set_value(i, v);
}

/// Labels in [0, classes) with a fraction of ignore pixels.
inline LabelMap random_labels(int h, int w, int classes, std::uint64_t seed,
                              double ignore_share = 0.0) {
  Rng rng(seed);
  LabelMap m(h, w);
  for (auto& l : m.labels) {
    l = rng.bernoulli(ignore_share) ? kIgnore : static_cast<std::uint8_t>(rng.below(classes));
  }
  return m;
}

/// Blocky labels so contours are sparse rather than everywhere.
inline LabelMap blocky_labels(int h, int w, int classes, std::uint64_t seed, int block = 3) {
  Rng rng(seed);
  LabelMap m(h, w);
  const int bh = (h + block - 1) / block, bw = (w + block - 1) / block;
  std::vector<std::uint8_t> cells(static_cast<std::size_t>(bh) * bw);
  for (auto& c : cells) c = static_cast<std::uint8_t>(rng.below(classes));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.at(y, x) = cells[static_cast<std::size_t>(y / block) * bw + x / block];
  }
  return m;
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("yseg_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace yseg::test
