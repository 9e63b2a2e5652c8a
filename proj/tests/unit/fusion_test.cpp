#include "doctest.h"
#include "support.hpp"
#include "yseg/fusion.hpp"
#include "yseg/model.hpp"

using namespace yseg;
using namespace yseg::test;

namespace {

struct Fixture {
  Initializer init{21, kV};
  FusionGate gate{FusionConfig{3, 8, FusionAttention::sigmoid}, init};
  Tensor css = random_tensor({2, 3, 8, 8}, 22, kV, -3, 3);
  Tensor sb = random_tensor({2, 3, 8, 8}, 23, kV, -3, 3);
};

}  // namespace

TEST_CASE("open gate returns the refined segmentation") {
  Fixture f;
  fill(f.gate.attention_head().bias, 100.0);
  FusionOutput o = f.gate(f.css, f.sb, Mode::train);
  CHECK(max_abs_diff(o.final, o.css_prime) < 1e-6);
}

TEST_CASE("closed gate returns the boundary scores") {
  Fixture f;
  fill(f.gate.attention_head().bias, -100.0);
  FusionOutput o = f.gate(f.css, f.sb, Mode::train);
  CHECK(max_abs_diff(o.final, f.sb) < 1e-6);
}

TEST_CASE("final is a convex combination and matches the blend") {
  for (FusionAttention att : {FusionAttention::sigmoid, FusionAttention::softmax}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Initializer init(seed, kV);
      FusionGate gate({4, 8, att}, init);
      fill(gate.attention_head().weight, 0.0);
      for (std::size_t i = 0; i < 4; ++i) gate.attention_head().bias.set_value(i, 2.0 * i - 3.0);
      Tensor css = random_tensor({1, 4, 6, 6}, 100 + seed, kV, -5, 5);
      Tensor sb = random_tensor({1, 4, 6, 6}, 200 + seed, kV, -5, 5);
      FusionOutput o = gate(css, sb, Mode::train);
      const auto a = o.a_map.to_vector(), fin = o.final.to_vector(), cp = o.css_prime.to_vector(),
                 s = sb.to_vector();
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] >= 0.0);
        CHECK(a[i] <= 1.0);
        CHECK(fin[i] >= std::min(cp[i], s[i]) - 1e-12);
        CHECK(fin[i] <= std::max(cp[i], s[i]) + 1e-12);
        CHECK(fin[i] == a[i] * cp[i] + (1 - a[i]) * s[i]);
        // the complement is formed exactly
        CHECK(a[i] + (1.0 - a[i]) == 1.0);
      }
    }
  }
}

TEST_CASE("sb gradient is the complement of the attention map") {
  Fixture f;
  Tensor sb = f.sb.detach();
  sb.set_requires_grad(true);
  FusionOutput o = f.gate(f.css, sb, Mode::train);
  backward(sum(o.final));
  const auto g = sb.grad_vector(), a = o.a_map.to_vector();
  double err = 0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(g[i] - (1 - a[i])));
  CHECK(err < 1e-6);
}

TEST_CASE("shape mismatch is reported") {
  Fixture f;
  CHECK_THROWS_AS(f.gate(f.css, random_tensor({2, 3, 8, 4}, 1), Mode::train), Error);
}

TEST_CASE("ablation switches change the composition") {
  Tensor x = random_tensor({1, 3, 16, 16}, 30, Precision::standard);
  SUBCASE("baseline") {
    ModelConfig cfg;
    cfg.boundary_stream = false;
    cfg.fusion_gate = false;
    YModel m(cfg, 1);
    YOutput o = m.forward(x, Mode::eval);
    CHECK(max_abs_diff(o.final, o.css) == 0.0);
    CHECK_FALSE(o.sb.defined());
    CHECK(m.boundary_detector() == nullptr);
  }
  SUBCASE("boundary stream without the gate sums css and sb") {
    ModelConfig cfg;
    cfg.fusion_gate = false;
    YModel m(cfg, 1);
    YOutput o = m.forward(x, Mode::eval);
    CHECK(max_abs_diff(o.final, add(o.css, o.sb)) == 0.0);
    CHECK(m.fusion_gate() == nullptr);
  }
  SUBCASE("full model") {
    YModel m(ModelConfig{}, 1);
    YOutput o = m.forward(x, Mode::eval);
    CHECK(max_abs_diff(o.final, blend(o.a_map, o.css_prime, o.sb)) == 0.0);
  }
}
