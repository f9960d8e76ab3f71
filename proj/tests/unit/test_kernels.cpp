#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "hfa/gradients.hpp"
#include "hfa/kernels.hpp"
#include "hfa/optimizer.hpp"
#include "oracles.hpp"

using namespace hfa;
namespace K = hfa::kernels;

namespace {

// Restores auto-detection when a test case ends.
struct OverrideGuard {
  ~OverrideGuard() { K::set_override(std::nullopt); }
};

std::vector<double> uniform(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

bool have_avx2() { return K::avx2_table() != nullptr && K::cpu_has_avx2(); }

}  // namespace

TEST_CASE("scalar step kernels match the closed forms") {
  const K::Table& s = K::scalar_table();
  const std::vector<double> thr = uniform(37, -2.0, 2.0, 1);
  std::vector<double> g(thr.size()), dg(thr.size());
  s.tanh_step(7.0, 0.5, 0.3, thr.data(), thr.size(), g.data(), dg.data());
  for (std::size_t i = 0; i < thr.size(); ++i) {
    const double x = (0.3 - thr[i]) * 0.5;
    CHECK(g[i] == doctest::Approx(heaviside_probability(x, {HeavisideKind::tanh, 7.0})).epsilon(1e-15));
    CHECK(dg[i] == doctest::Approx(heaviside_derivative(x, {HeavisideKind::tanh, 7.0})).epsilon(1e-13));
  }
  s.circle_step(0.2, 1.0, 0.0, thr.data(), thr.size(), g.data(), nullptr);
  for (std::size_t i = 0; i < thr.size(); ++i) {
    CHECK(g[i] == doctest::Approx(heaviside_probability(-thr[i], {HeavisideKind::circle, 0.2})).epsilon(1e-15));
  }
}

TEST_CASE("avx2 step kernels agree with scalar") {
  if (!have_avx2()) return;
  const K::Table& s = K::scalar_table();
  const K::Table& a = *K::avx2_table();
  for (std::size_t n : {1u, 3u, 4u, 5u, 8u, 33u, 257u}) {
    for (double k : {0.5, 10.0, 1000.0}) {
      const std::vector<double> thr = uniform(n, -3.0, 3.0, n + static_cast<std::uint64_t>(k));
      std::vector<double> g1(n), d1(n), g2(n), d2(n);
      s.tanh_step(k, 0.25, 0.1, thr.data(), n, g1.data(), d1.data());
      a.tanh_step(k, 0.25, 0.1, thr.data(), n, g2.data(), d2.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(g1[i] - g2[i]) <= 1e-13);
        CHECK(std::abs(d1[i] - d2[i]) <= 1e-12 * std::max(1.0, std::abs(d1[i])));
      }
      s.circle_step(k, 0.25, 0.1, thr.data(), n, g1.data(), d1.data());
      a.circle_step(k, 0.25, 0.1, thr.data(), n, g2.data(), d2.data());
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(g1[i] - g2[i]) <= 1e-14);
        CHECK(std::abs(d1[i] - d2[i]) <= 1e-13 * std::max(1.0, std::abs(d1[i])));
      }
    }
  }
  // saturated arguments
  const std::vector<double> far{-1e6, -50.0, 50.0, 1e6, 0.0};
  std::vector<double> g1(5), g2(5);
  s.tanh_step(100.0, 1.0, 0.0, far.data(), 5, g1.data(), nullptr);
  a.tanh_step(100.0, 1.0, 0.0, far.data(), 5, g2.data(), nullptr);
  for (std::size_t i = 0; i < 5; ++i) CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-15));
}

TEST_CASE("avx2 adam and squared error agree with scalar") {
  if (!have_avx2()) return;
  const K::Table& s = K::scalar_table();
  const K::Table& a = *K::avx2_table();
  for (std::size_t n : {1u, 6u, 64u, 101u}) {
    K::AdamArgs args;
    args.lr = 0.1;
    args.bias1 = 0.19;
    args.bias2 = 0.002;
    args.lo = 0.1;
    args.hi = 0.9;
    std::vector<double> p1 = uniform(n, 0.1, 0.9, 1), m1 = uniform(n, -1, 1, 2), v1 = uniform(n, 0, 1, 3);
    std::vector<double> p2 = p1, m2 = m1, v2 = v1;
    const std::vector<double> grad = uniform(n, -5, 5, 4);
    s.adam_update(args, p1.data(), grad.data(), m1.data(), v1.data(), n);
    a.adam_update(args, p2.data(), grad.data(), m2.data(), v2.data(), n);
    CHECK(p1 == p2);
    CHECK(m1 == m2);
    CHECK(v1 == v2);

    const std::vector<double> x = uniform(n, 0, 1, 5), y = uniform(n, 0, 1, 6);
    std::vector<std::uint8_t> keep(n);
    for (std::size_t i = 0; i < n; ++i) keep[i] = i % 3 != 0;
    CHECK(s.squared_error_sum(x.data(), y.data(), nullptr, n) ==
          doctest::Approx(a.squared_error_sum(x.data(), y.data(), nullptr, n)).epsilon(1e-14));
    CHECK(s.squared_error_sum(x.data(), y.data(), keep.data(), n) ==
          doctest::Approx(a.squared_error_sum(x.data(), y.data(), keep.data(), n)).epsilon(1e-14));
  }
}

TEST_CASE("renders and gradients agree across instruction sets") {
  if (!have_avx2()) return;
  OverrideGuard guard;
  const Heightfield f = oracle::random_field(8, 8, 3);
  std::vector<ViewSpec> views;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    ViewSpec v = oracle::random_view(seed, 16);
    v.desired = Image(16, 16, {0.3, 0.5, 0.7});
    views.push_back(v);
  }
  for (auto kind : {HeavisideKind::tanh, HeavisideKind::circle}) {
    const HeavisideSpec spec{kind, 25.0};
    K::set_override(K::Isa::scalar);
    CHECK(K::active_isa() == K::Isa::scalar);
    const BackwardResult rs = backward(f, views, spec, LossConfig::both());
    K::set_override(K::Isa::avx2);
    CHECK(K::active_isa() == K::Isa::avx2);
    const BackwardResult ra = backward(f, views, spec, LossConfig::both());
    CHECK(rs.loss.total == doctest::Approx(ra.loss.total).epsilon(1e-12));
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(rs.grad.d_heights[i] == doctest::Approx(ra.grad.d_heights[i]).epsilon(1e-9));
      for (std::size_t ch = 0; ch < 3; ++ch) {
        CHECK(rs.grad.d_colors[i][ch] == doctest::Approx(ra.grad.d_colors[i][ch]).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("hard renders are identical across instruction sets") {
  if (!have_avx2()) return;
  OverrideGuard guard;
  const Heightfield f = oracle::random_field(8, 8, 4);
  const ViewSpec v = oracle::random_view(9, 16);
  K::set_override(K::Isa::scalar);
  const Image a = render_hard(f, v).image;
  K::set_override(K::Isa::avx2);
  CHECK(render_hard(f, v).image == a);
}

TEST_CASE("override selects the kernel table") {
  OverrideGuard guard;
  K::set_override(K::Isa::scalar);
  CHECK(&K::active() == &K::scalar_table());
  CHECK(K::to_string(K::Isa::avx2) == "avx2");
  K::set_override(std::nullopt);
  CHECK((K::active_isa() == K::Isa::avx2) == have_avx2());
}
