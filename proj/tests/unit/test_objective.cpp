#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "hfa/gradients.hpp"
#include "hfa/objective.hpp"
#include "oracles.hpp"

using namespace hfa;

namespace {

Heightfield row_field(std::vector<double> heights, int rows = 1) {
  const int cols = static_cast<int>(heights.size()) / rows;
  Heightfield f = Heightfield::uniform(rows, cols, 1.0, 0.0, 1.0, 0.5, {});
  f.heights = std::move(heights);
  return f;
}

}  // namespace

TEST_CASE("mse examples") {
  const Image black(4, 4), white(4, 4, {1, 1, 1});
  Image half(4, 4);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 2; ++i) half.at(i, j) = {1, 1, 1};
  }
  const std::vector<Image> a{black}, b{white}, c{half};
  CHECK(mse_loss(a, a) == 0.0);
  CHECK(mse_loss(a, b) == 1.0);
  CHECK(mse_loss(a, c) == 0.5);
  Image one_channel(2, 2);
  one_channel.at(0, 0).r = 1.0;
  one_channel.at(1, 1).r = 0.5;
  const std::vector<Image> d{Image(2, 2)}, e{one_channel};
  CHECK(mse_loss(d, e) == doctest::Approx((1.0 + 0.25) / 12.0).epsilon(1e-15));
  // two views average
  const std::vector<Image> ab{black, black}, bw{black, white};
  CHECK(mse_loss(ab, bw) == 0.5);
}

TEST_CASE("mse masking") {
  const Image black(2, 2), white(2, 2, {1, 1, 1});
  const std::vector<Image> a{black}, b{white};
  const std::vector<std::vector<std::uint8_t>> mask{{1, 0, 0, 0}};
  CHECK(mse_loss(a, b, mask, BackgroundPolicy::mask) == 0.75);
  CHECK(mse_loss(a, b, mask, BackgroundPolicy::penalize) == 1.0);
  const std::vector<Image> small{Image(3, 3)};
  CHECK_THROWS_AS(mse_loss(a, small), InvalidArgument);
}

TEST_CASE("barrier values") {
  Heightfield f = Heightfield::uniform(3, 4, 1.0, 0.0, 2.0, 1.0, {});
  CHECK(barrier_loss(f) == doctest::Approx(2.0 * 12 * std::numbers::ln2).epsilon(1e-14));
  for (double g : barrier_gradient(f)) CHECK(std::abs(g) < 1e-15);
  f.heights[5] = 0.0;
  CHECK(barrier_loss(f) == std::numeric_limits<double>::infinity());
  f.heights[5] = 2.0;
  CHECK(barrier_loss(f) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(barrier_gradient(f), NumericError);
  f.heights[5] = 0.5;
  const std::vector<double> g = barrier_gradient(f);
  // d/dh of -log(1-u) - log(u), u = h / 2
  CHECK(g[5] == doctest::Approx((1.0 / 0.75 - 1.0 / 0.25) / 2.0).epsilon(1e-14));
}

TEST_CASE("neighbor values") {
  CHECK(neighbor_loss(row_field({0, 1, 0})) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(neighbor_loss(row_field({0, 1, 1, 0}, 2)) == doctest::Approx(4.0).epsilon(1e-5));
  CHECK(neighbor_loss(row_field({0.3, 0.3, 0.3, 0.3}, 2)) == 0.0);
  // scale invariance: heights normalized by the range
  Heightfield f = row_field({0, 2, 0});
  f.h_max = 2.0;
  CHECK(neighbor_loss(f) == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("regularizer gradients match finite differences") {
  Heightfield f = oracle::random_field(4, 5, 3, 1.0, 0.0, 4.0);
  const std::vector<double> gb = barrier_gradient(f);
  const std::vector<double> gn = neighbor_gradient(f, 1e-3);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double h = 1e-6;
    Heightfield a = f, b = f;
    a.heights[i] += h;
    b.heights[i] -= h;
    CHECK(gb[i] == doctest::Approx((barrier_loss(a) - barrier_loss(b)) / (2 * h)).epsilon(1e-5));
    CHECK(gn[i] == doctest::Approx((neighbor_loss(a, 1e-3) - neighbor_loss(b, 1e-3)) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("combined loss weights per bar") {
  LossBreakdown parts{0.1, 4.0, 8.0, 0.0};
  CHECK(combine_loss(parts, LossConfig::none(), 4) == 0.1);
  LossConfig both = LossConfig::both();
  both.barrier_weight = 0.5;
  both.neighbor_weight = 0.25;
  CHECK(combine_loss(parts, both, 4) == doctest::Approx(0.1 + 0.5 + 0.5));
  CHECK(combine_loss(parts, LossConfig::barrier_only(), 4) ==
        doctest::Approx(0.1 + LossConfig{}.barrier_weight * 1.0));
}

TEST_CASE("loss without regularizers is the mse") {
  const Heightfield f = oracle::random_field(4, 4, 19);
  ViewSpec v = oracle::random_view(3, 8);
  v.desired = Image(8, 8, {0.2, 0.7, 0.4});
  const std::vector<ViewSpec> views{v};
  const HeavisideSpec spec{HeavisideKind::tanh, 10.0};
  const LossBreakdown lb = total_loss(f, views, spec, LossConfig::none());
  CHECK(lb.total == lb.mse);
  const std::vector<Image> r{render_view(f, v, spec).image}, d{v.desired};
  CHECK(lb.mse == mse_loss(r, d));
  CHECK(backward(f, views, spec, LossConfig::none()).loss.total == lb.total);
}

TEST_CASE("hard mse of the hard render is zero") {
  const Heightfield f = oracle::random_field(4, 4, 20);
  ViewSpec v = oracle::random_view(4, 8);
  v.desired = render_hard(f, v).image;
  const std::vector<ViewSpec> views{v};
  CHECK(hard_mse(f, views) == 0.0);
}

TEST_CASE("loss config validation") {
  LossConfig c;
  c.barrier_weight = -1.0;
  CHECK_THROWS(c.validate());
  c = {};
  c.neighbor_epsilon = 0.0;
  CHECK_THROWS(c.validate());
  CHECK_NOTHROW(LossConfig::both().validate());
}
