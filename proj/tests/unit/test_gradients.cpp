#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "doctest.h"
#include "hfa/gradients.hpp"
#include "hfa/objective.hpp"
#include "oracles.hpp"

using namespace hfa;

namespace {

std::vector<ViewSpec> views_with_targets(std::uint64_t seed, int count, int m) {
  std::vector<ViewSpec> views;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int v = 0; v < count; ++v) {
    ViewSpec view = oracle::random_view(seed * 10 + v, m);
    view.desired = Image(m, m);
    for (std::size_t p = 0; p < view.desired.size(); ++p) view.desired[p] = {u(rng), u(rng), u(rng)};
    views.push_back(std::move(view));
  }
  return views;
}

double total(const Heightfield& f, const std::vector<ViewSpec>& views, const HeavisideSpec& spec,
             const LossConfig& cfg) {
  return total_loss(f, views, spec, cfg).total;
}

}  // namespace

TEST_CASE("gradient vanishes when the render matches its target") {
  const Heightfield f = oracle::random_field(5, 5, 2);
  const HeavisideSpec spec{HeavisideKind::tanh, 10.0};
  std::vector<ViewSpec> views;
  for (std::uint64_t s = 0; s < 2; ++s) {
    ViewSpec v = oracle::random_view(s, 10);
    v.desired = render_view(f, v, spec).image;
    views.push_back(v);
  }
  const BackwardResult r = backward(f, views, spec, LossConfig::none());
  CHECK(r.loss.mse == 0.0);
  for (double d : r.grad.d_heights) CHECK(d == 0.0);
  for (const Rgb& c : r.grad.d_colors) CHECK(c == Rgb{});
}

TEST_CASE("color gradient of a single mismatched pixel") {
  // At nadir each pixel sees exactly one bar with weight one.
  const int m = 4;
  const Heightfield f = oracle::random_field(m, m, 6);
  ViewSpec v{90.0, 0.0, m, {}};
  v.desired = render_hard(f, v).image;
  const double delta = 0.25;
  v.desired.at(1, 2).g = std::clamp(v.desired.at(1, 2).g - delta, 0.0, 1.0);
  const double diff = f.color(1, 2).g - v.desired.at(1, 2).g;
  const std::vector<ViewSpec> views{v};
  const BackwardResult r = backward(f, views, {HeavisideKind::tanh, 10.0}, LossConfig::none());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double want = (i == f.index(1, 2) && ch == 1) ? 2.0 * diff / (3.0 * m * m) : 0.0;
      CHECK(r.grad.d_colors[i][ch] == doctest::Approx(want).epsilon(1e-14));
    }
  }
  CHECK(r.loss.mse == doctest::Approx(diff * diff / (3.0 * m * m)).epsilon(1e-14));
}

TEST_CASE("color gradients are exact under central differences") {
  const Heightfield f = oracle::random_field(4, 4, 12, 1.0, 0.0, 4.0);
  const std::vector<ViewSpec> views = views_with_targets(3, 2, 8);
  const HeavisideSpec spec{HeavisideKind::erfc, 5.0};
  const LossConfig cfg = LossConfig::both();
  const BackwardResult r = backward(f, views, spec, cfg);
  std::mt19937_64 rng(1);
  for (int probe = 0; probe < 20; ++probe) {
    const std::size_t i = rng() % f.size();
    const std::size_t ch = rng() % 3;
    Heightfield a = f, b = f;
    const double h = 1e-3;
    if (f.colors[i][ch] < h || f.colors[i][ch] > 1 - h) continue;
    a.colors[i][ch] += h;
    b.colors[i][ch] -= h;
    const double fd = (total(a, views, spec, cfg) - total(b, views, spec, cfg)) / (2 * h);
    CHECK(std::abs(fd - r.grad.d_colors[i][ch]) <= 1e-8 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("height gradients match finite differences") {
  for (auto kind : {HeavisideKind::tanh, HeavisideKind::circle, HeavisideKind::erfc}) {
    const Heightfield f = oracle::random_field(6, 6, 21, 1.0, 0.0, 4.0);
    const std::vector<ViewSpec> views = views_with_targets(8, 3, 12);
    GradCheckOptions opts;
    opts.probes = 40;
    opts.seed = 4;
    const GradCheckReport rep =
        grad_check(f, views, {kind, 10.0}, LossConfig::both(), RenderSettings{}, opts);
    CAPTURE(to_string(kind));
    CAPTURE(rep.worst);
    CHECK(rep.probes.size() == 40);
    CHECK(rep.max_rel_error < 1e-2);
    CHECK(rep.tie_crossings < 10);
  }
}

TEST_CASE("slice gradients scatter without loss") {
  const Heightfield f = oracle::random_field(5, 7, 33);
  const std::vector<ViewSpec> views = views_with_targets(5, 2, 10);
  BackwardOptions opts;
  opts.keep_slice_gradients = true;
  const BackwardResult r = backward(f, views, {HeavisideKind::tanh, 10.0}, LossConfig::none(), {}, opts);
  REQUIRE(!r.slices.empty());
  std::vector<double> dh(f.size(), 0.0);
  std::vector<Rgb> dc(f.size());
  double sum_slices = 0.0, sum_grid = 0.0;
  for (const SliceGradient& s : r.slices) {
    for (std::size_t k = 0; k < s.source_cells.size(); ++k) {
      dh[s.source_cells[k]] += s.d_heights[k];
      dc[s.source_cells[k]] += s.d_colors[k];
      sum_slices += s.d_heights[k];
    }
  }
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(dh[i] == doctest::Approx(r.grad.d_heights[i]).epsilon(1e-12));
    for (std::size_t ch = 0; ch < 3; ++ch) CHECK(dc[i][ch] == doctest::Approx(r.grad.d_colors[i][ch]).epsilon(1e-12));
    sum_grid += r.grad.d_heights[i];
  }
  CHECK(sum_slices == doctest::Approx(sum_grid).epsilon(1e-12));
}

TEST_CASE("tiled gradients match finite differences") {
  const Heightfield f = oracle::random_field(3, 3, 44, 1.0, 0.0, 4.0);
  const std::vector<ViewSpec> views = views_with_targets(9, 2, 9);
  RenderSettings s;
  s.tiling = 3;
  GradCheckOptions opts;
  opts.probes = 20;
  const GradCheckReport rep = grad_check(f, views, {HeavisideKind::tanh, 10.0}, LossConfig::none(), s, opts);
  CAPTURE(rep.worst);
  CHECK(rep.max_rel_error < 1e-2);
}

TEST_CASE("non-finite gradients name the offending pixel") {
  const Heightfield f = oracle::random_field(4, 4, 8);
  std::vector<ViewSpec> views = views_with_targets(2, 1, 8);
  views[0].desired.at(3, 5).r = std::numeric_limits<double>::quiet_NaN();
  try {
    backward(f, views, {HeavisideKind::tanh, 10.0}, LossConfig::none());
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("view 0 pixel (3,5)") != std::string::npos);
  }
}

TEST_CASE("backward validates its inputs") {
  const Heightfield f = oracle::random_field(4, 4, 8);
  std::vector<ViewSpec> views = views_with_targets(2, 2, 8);
  CHECK_THROWS_AS(backward(f, std::span<const ViewSpec>{}, {HeavisideKind::tanh, 10.0}, LossConfig::none()),
                  InvalidArgument);
  views[1].desired = Image(4, 4);
  CHECK_THROWS_AS(backward(f, views, {HeavisideKind::tanh, 10.0}, LossConfig::none()), InvalidArgument);
}
