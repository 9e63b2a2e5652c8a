#include "doctest.h"
#include "support.hpp"
#include "yseg/backbone.hpp"
#include "yseg/ops.hpp"

using namespace yseg;
using namespace yseg::test;

namespace {

NamedTensors params(const Backbone& b) {
  NamedTensors out;
  b.collect("bb", out);
  return out;
}

// Input pixels whose gradient is nonzero for the sum over channels of one f5 cell.
int f5_footprint(const BackboneConfig& cfg) {
  Initializer init(3, kV);
  Backbone bb(cfg, init);
  Tensor x = leaf({1, 3, 64, 64}, 4);
  FeaturePyramid p = bb.extract_features(x, Mode::eval);
  const Tensor& f5 = p.level(5);
  std::vector<double> sel(f5.numel(), 0.0);
  for (int c = 0; c < f5.dim(1); ++c) sel[(static_cast<std::size_t>(c) * 8 + 4) * 8 + 4] = 1.0;
  backward(sum(mul(f5, Tensor::from(f5.shape(), sel, kV))));
  const auto g = x.grad_vector();
  int count = 0;
  for (int y = 0; y < 64; ++y)
    for (int xx = 0; xx < 64; ++xx) {
      bool any = false;
      for (int c = 0; c < 3; ++c) any = any || g[(static_cast<std::size_t>(c) * 64 + y) * 64 + xx] != 0.0;
      count += any;
    }
  return count;
}

}  // namespace

TEST_CASE("pyramid shapes under the default plan") {
  Initializer init(1, Precision::standard);
  Backbone bb(BackboneConfig{}, init);
  FeaturePyramid p = bb.extract_features(Tensor::zeros({1, 3, 64, 64}), Mode::train);
  CHECK(p.level(1).shape() == Shape{1, 8, 32, 32});
  CHECK(p.level(2).shape() == Shape{1, 16, 16, 16});
  CHECK(p.level(3).shape() == Shape{1, 32, 8, 8});
  CHECK(p.level(4).shape() == Shape{1, 32, 8, 8});
  CHECK(p.level(5).shape() == Shape{1, 32, 8, 8});
  CHECK(p.strides == std::array<int, 5>{2, 4, 8, 8, 8});
  CHECK(p.dilations[3] == 2);
  CHECK(p.dilations[4] == 4);
  CHECK(p.channels == std::array<int, 5>{8, 16, 32, 32, 32});
}

TEST_CASE("output stride stays 8 for any valid size") {
  Initializer init(1, Precision::standard);
  Backbone bb(BackboneConfig{}, init);
  for (auto [h, w] : {std::pair{16, 16}, {40, 24}, {48, 72}}) {
    FeaturePyramid p = bb.extract_features(Tensor::zeros({2, 3, h, w}), Mode::eval);
    for (int l = 1; l <= 5; ++l) {
      CHECK(p.level(l).dim(2) == (h + p.strides[l - 1] - 1) / p.strides[l - 1]);
      CHECK(p.level(l).dim(3) == (w + p.strides[l - 1] - 1) / p.strides[l - 1]);
    }
    CHECK(p.level(3).shape() == p.level(5).shape());
  }
  CHECK_THROWS_AS(bb.extract_features(Tensor::zeros({1, 3, 20, 16}), Mode::eval), Error);
}

TEST_CASE("zero-weight network gives constant levels") {
  Initializer init(2, kV);
  Backbone bb(BackboneConfig{}, init);
  for (const NamedTensor& t : params(bb)) {
    if (t.name.find("conv.weight") != std::string::npos ||
        t.name.find("proj.weight") != std::string::npos) {
      fill(t.tensor, 0.0);
    }
  }
  FeaturePyramid p = bb.extract_features(random_tensor({2, 3, 32, 32}, 5), Mode::train);
  for (int l = 1; l <= 5; ++l) {
    const auto v = p.level(l).to_vector();
    for (double x : v) CHECK(x == v.front());
  }
}

TEST_CASE("residual stage reduces to its projection when the body is zeroed") {
  Initializer init(2, kV);
  Backbone bb(BackboneConfig{}, init);
  const NamedTensors named = params(bb);
  for (const NamedTensor& t : named) {
    if (t.name.find("body.conv.weight") != std::string::npos) fill(t.tensor, 0.0);
  }
  // stage 1 projection: output channel c copies input channel c % 3
  Tensor proj = find_tensor(named, "bb.stage1.0.proj.weight");
  fill(proj, 0.0);
  for (int c = 0; c < 8; ++c) proj.set_value(static_cast<std::size_t>(c) * 3 + c % 3, 1.0);

  Tensor x = random_tensor({1, 3, 16, 16}, 6);
  FeaturePyramid p = bb.extract_features(x, Mode::train);
  double err = 0;
  for (int c = 0; c < 8; ++c)
    for (int y = 0; y < 8; ++y)
      for (int xx = 0; xx < 8; ++xx) {
        const double got = p.level(1).value((static_cast<std::size_t>(c) * 8 + y) * 8 + xx);
        const double want = x.value((static_cast<std::size_t>(c % 3) * 16 + 2 * y) * 16 + 2 * xx);
        err = std::max(err, std::abs(got - want));
      }
  CHECK(err < 1e-12);
  // stages 4 and 5 keep channels and stride, so their skip is the identity
  CHECK(max_abs_diff(p.level(4), p.level(3)) < 1e-12);
  CHECK(max_abs_diff(p.level(5), p.level(4)) < 1e-12);
}

TEST_CASE("dilated late stages widen the receptive field") {
  BackboneConfig dilated;
  BackboneConfig plain;
  plain.late_dilations = {1, 1};
  const int wide = f5_footprint(dilated), narrow = f5_footprint(plain);
  INFO("dilated " << wide << " plain " << narrow);
  CHECK(wide > narrow);
}
