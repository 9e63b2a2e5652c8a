#include "yseg/image.hpp"

#include "yseg/error.hpp"

namespace yseg {

Tensor images_to_tensor(std::span<const Image> images, Precision p) {
  require(!images.empty(), ErrorCode::invalid_argument, "images_to_tensor: empty batch");
  const Image& f = images[0];
  Tensor t = Tensor::zeros({static_cast<int>(images.size()), f.channels, f.height, f.width}, p);
  dispatch(p, [&]<class T>(std::type_identity<T>) {
    auto d = t.data<T>();
    std::size_t o = 0;
    for (const Image& im : images) {
      require(im.channels == f.channels && im.height == f.height && im.width == f.width,
              ErrorCode::shape, "images_to_tensor: images differ in size");
      for (float v : im.data) d[o++] = static_cast<T>(v);
    }
  });
  return t;
}

Tensor boundaries_to_tensor(std::span<const SemanticBoundaryMap> maps, Precision p) {
  require(!maps.empty(), ErrorCode::invalid_argument, "boundaries_to_tensor: empty batch");
  const auto& f = maps[0];
  Tensor t =
      Tensor::zeros({static_cast<int>(maps.size()), f.num_classes, f.height, f.width}, p);
  dispatch(p, [&]<class T>(std::type_identity<T>) {
    auto d = t.data<T>();
    std::size_t o = 0;
    for (const auto& m : maps) {
      require(m.num_classes == f.num_classes && m.height == f.height && m.width == f.width,
              ErrorCode::shape, "boundaries_to_tensor: maps differ in size");
      for (std::uint8_t v : m.planes) d[o++] = static_cast<T>(v);
    }
  });
  return t;
}

std::vector<LabelMap> argmax_labels(const Tensor& scores) {
  require(scores.rank() == 4, ErrorCode::shape,
          "argmax_labels: expected N×L×H×W, got " + shape_str(scores.shape()));
  const int n = scores.dim(0), l = scores.dim(1), h = scores.dim(2), w = scores.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  std::vector<LabelMap> out;
  dispatch(scores.precision(), [&]<class T>(std::type_identity<T>) {
    const auto s = scores.data<T>();
    for (int b = 0; b < n; ++b) {
      LabelMap m(h, w);
      for (std::size_t p = 0; p < plane; ++p) {
        int best = 0;
        T bv = s[static_cast<std::size_t>(b) * l * plane + p];
        for (int c = 1; c < l; ++c) {
          const T v = s[(static_cast<std::size_t>(b) * l + c) * plane + p];
          if (v > bv) {
            bv = v;
            best = c;
          }
        }
        m.labels[p] = static_cast<std::uint8_t>(best);
      }
      out.push_back(std::move(m));
    }
  });
  return out;
}

}  // namespace yseg
