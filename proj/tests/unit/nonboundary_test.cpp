#include "doctest.h"
#include "support.hpp"
#include "yseg/data.hpp"
#include "yseg/losses.hpp"
#include "yseg/model.hpp"
#include "yseg/nonboundary.hpp"
#include "yseg/optim.hpp"

using namespace yseg;
using namespace yseg::test;

TEST_CASE("aspp projects to a fixed width") {
  for (bool pooling : {false, true}) {
    for (const std::vector<int>& rates : {std::vector<int>{1}, {1, 2}, {1, 2, 4}, {3}}) {
      Initializer init(1, Precision::standard);
      Aspp aspp({rates, pooling, 32}, 16, init);
      Tensor y = aspp(random_tensor({2, 16, 8, 8}, 2, Precision::standard), Mode::train);
      CHECK(y.shape() == Shape{2, 32, 8, 8});
    }
  }
  Initializer init(1, Precision::standard);
  CHECK_THROWS_AS(Aspp({{0}, false, 32}, 16, init), Error);
  CHECK_THROWS_AS(Aspp({{}, false, 32}, 16, init), Error);
}

TEST_CASE("single-rate aspp without pooling is pointwise") {
  Initializer init(3, kV);
  Aspp aspp({{1}, false, 8}, 4, init);
  Tensor x = random_tensor({1, 4, 6, 6}, 4);
  Tensor y0 = aspp(x, Mode::eval);
  x.set_value(2 * 6 + 3, x.value(2 * 6 + 3) + 1.0);  // channel 0, pixel (2, 3)
  Tensor y1 = aspp(x, Mode::eval);
  for (int c = 0; c < 8; ++c)
    for (int p = 0; p < 36; ++p) {
      const std::size_t i = static_cast<std::size_t>(c) * 36 + p;
      if (p != 2 * 6 + 3) CHECK(y0.value(i) == y1.value(i));
    }
}

TEST_CASE("pooling branch on a constant input gives a constant map") {
  Initializer init(5, kV);
  Aspp aspp({{1}, true, 8}, 4, init);
  Tensor y = aspp(Tensor::full({1, 4, 5, 5}, 0.7, kV), Mode::eval);
  for (int c = 0; c < 8; ++c)
    for (int p = 0; p < 25; ++p) CHECK(y.value(static_cast<std::size_t>(c) * 25 + p) == y.value(c * 25));
}

TEST_CASE("css head shape with and without the decoder") {
  for (bool decoder : {false, true}) {
    ModelConfig cfg;
    cfg.num_classes = 3;
    cfg.use_decoder = decoder;
    cfg.boundary_stream = false;
    cfg.fusion_gate = false;
    YModel m(cfg, 1);
    YOutput o = m.forward(random_tensor({2, 3, 32, 48}, 6, Precision::standard), Mode::train);
    CHECK(o.css.shape() == Shape{2, 3, 32, 48});
    CHECK(o.final.shape() == o.css.shape());
  }
}

TEST_CASE("zeroed classifier ties every class and argmax picks class 0") {
  ModelConfig cfg;
  cfg.num_classes = 2;
  YModel m(cfg, 1);
  fill(m.css_head().classifier().weight, 0.0);
  fill(m.css_head().classifier().bias, 0.0);
  YOutput o = m.forward(random_tensor({1, 3, 16, 16}, 7, Precision::standard), Mode::eval);
  for (double v : o.css.to_vector()) CHECK(v == 0.0);
  for (const LabelMap& l : argmax_labels(o.css)) {
    for (auto v : l.labels) CHECK(v == 0);
  }
}

TEST_CASE("css shifts with the input at stride granularity") {
  ModelConfig cfg;
  cfg.precision = kV;
  cfg.aspp.image_pooling = false;  // a global branch is not translation-equivariant
  cfg.boundary_stream = false;
  cfg.fusion_gate = false;
  YModel m(cfg, 9);
  const int h = 32, w = 256, shift = 8;
  Tensor wide = random_tensor({1, 3, h, w + shift}, 10);
  std::vector<double> a(3 * h * w), b(3 * h * w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const std::size_t o = (static_cast<std::size_t>(c) * h + y) * w + x;
        a[o] = wide.value((static_cast<std::size_t>(c) * h + y) * (w + shift) + x);
        b[o] = wide.value((static_cast<std::size_t>(c) * h + y) * (w + shift) + x + shift);
      }
  const Tensor ca = m.forward(Tensor::from({1, 3, h, w}, a, kV), Mode::eval).css;
  const Tensor cb = m.forward(Tensor::from({1, 3, h, w}, b, kV), Mode::eval).css;
  // Column x of b sees column x + shift of a. Compare far from both side borders.
  double err = 0, scale = 0;
  for (int c = 0; c < cfg.num_classes; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 112; x < 136; ++x) {
        const double va = ca.value((static_cast<std::size_t>(c) * h + y) * w + x + shift);
        const double vb = cb.value((static_cast<std::size_t>(c) * h + y) * w + x);
        err = std::max(err, std::abs(va - vb));
        scale = std::max(scale, std::abs(va));
      }
  CHECK(scale > 0);
  CHECK(err < 1e-9 * std::max(1.0, scale));
}

TEST_CASE("non-boundary stream alone overfits one image") {
  ShapesConfig shapes;
  Sample s = gen_shapes(42, shapes);
  ModelConfig cfg;
  cfg.num_classes = shapes.num_classes;
  cfg.boundary_stream = false;
  cfg.fusion_gate = false;
  YModel m(cfg, 3);
  SgdOptimizer opt(m.parameters(), {0.9, 5e-4});
  const Tensor x = images_to_tensor(std::span(&s.image, 1));
  const Tensor target = one_hot(std::span(&s.labels, 1), cfg.num_classes);
  const Tensor ignore = ignore_mask(std::span(&s.labels, 1));
  const int iters = 200;
  for (int i = 0; i < iters; ++i) {
    opt.zero_grad();
    backward(bce_loss(m.forward(x, Mode::train).css, target, ignore));
    opt.step(poly_lr(0.1, i, iters));
  }
  const LabelMap pred = argmax_labels(m.forward(x, Mode::eval).css).front();
  int correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred.labels[i] == s.labels.labels[i];
  const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());
  INFO("pixel accuracy " << acc);
  CHECK(acc >= 0.95);
}
