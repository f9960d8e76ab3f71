#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "doctest.h"
#include "hfa/geometry.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/render.hpp"
#include "oracles.hpp"

using namespace hfa;

namespace {

bool near(const Vec3& a, const Vec3& b, double tol = 1e-15) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.z - b.z) <= tol;
}

Heightfield flat(int rows, int cols, double h = 1.0, double w = 1.0) {
  return Heightfield::uniform(rows, cols, w, 0.0, 4.0, h, {0.5, 0.5, 0.5});
}

}  // namespace

TEST_CASE("direction_from_angles closed form") {
  CHECK(near(direction_from_angles(90, 0), {0, 0, -1}));
  CHECK(near(direction_from_angles_unchecked(0, 0), {-1, 0, 0}));
  const double r = std::sqrt(2.0) / 2.0;
  const Vec3 d = direction_from_angles(45, 180);
  CHECK(near(d, {r, 0, -r}, 1e-15));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> el(0.1, 90.0), az(0.0, 359.99);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = direction_from_angles(el(rng), az(rng));
    CHECK(std::abs(std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z) - 1.0) < 1e-15);
  }
}

TEST_CASE("direction_from_angles rejects out-of-range angles") {
  CHECK_THROWS_AS(direction_from_angles(0, 0), InvalidArgument);
  CHECK_THROWS_AS(direction_from_angles(91, 0), InvalidArgument);
  CHECK_THROWS_AS(direction_from_angles(45, 360), InvalidArgument);
  CHECK_THROWS_AS(direction_from_angles(45, -1), InvalidArgument);
}

TEST_CASE("heightfield invariants") {
  Heightfield f = flat(2, 3);
  CHECK_NOTHROW(f.validate());
  f.heights[1] = 5.0;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  f = flat(2, 3);
  f.colors[0].g = 1.5;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  f = flat(2, 3);
  f.h_min = 4.0;
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
  f = flat(2, 3);
  f.heights.pop_back();
  CHECK_THROWS_AS(f.validate(), InvalidArgument);
}

TEST_CASE("view spec validation") {
  ViewSpec v{45, 0, 8, Image(8, 8)};
  CHECK_NOTHROW(v.validate());
  v.desired = Image(4, 4);
  CHECK_THROWS_AS(v.validate(), InvalidArgument);
  v = {45, 0, 0, {}};
  CHECK_THROWS_AS(v.validate(), InvalidArgument);
}

TEST_CASE("nadir rays map each pixel to one bar") {
  const Heightfield f = flat(4, 4);
  const CameraRays rays = make_camera_rays({90, 0, 4, {}}, FieldExtent::of(f));
  CHECK(rays.nadir);
  REQUIRE(rays.rays.size() == 16);
  for (const CameraRay& r : rays.rays) {
    CHECK(cell_at(FieldExtent::of(f), r.ground) == static_cast<std::size_t>(r.pixel));
  }
}

TEST_CASE("azimuth 0 groups each image row into one slice line") {
  // The pixel grid is traced back from ground points, so at azimuth 0 rays travel along x and
  // pixels sharing an image row share a line.
  const Heightfield f = flat(8, 8);
  const CameraRays rays = make_camera_rays({45, 0, 8, {}}, FieldExtent::of(f));
  CHECK(rays.lines.size() == 8);
  for (std::size_t l = 0; l < rays.lines.size(); ++l) {
    const int row = rays.rays[rays.line_begin[l]].pixel / 8;
    for (std::size_t k = rays.line_begin[l]; k < rays.line_begin[l + 1]; ++k) CHECK(rays.rays[k].pixel / 8 == row);
  }
}

TEST_CASE("slice lines match a brute-force projected-line binning") {
  const Heightfield f = flat(16, 16);
  const ViewSpec view{45, 30, 32, {}};
  const CameraRays rays = make_camera_rays(view, FieldExtent::of(f));
  // oracle: perpendicular offset of each pixel's ground point, binned at 1e-9
  const double a = 30.0 * std::numbers::pi / 180.0;
  const double nx = std::sin(a), ny = -std::cos(a);  // perpendicular to the travel direction -(cos a, sin a)
  std::map<long long, int> bins;
  for (int i = 0; i < 32; ++i) {
    for (int j = 0; j < 32; ++j) {
      const double gx = (j + 0.5) * 16.0 / 32, gy = (i + 0.5) * 16.0 / 32;
      ++bins[std::llround((nx * gx + ny * gy) * 1e9)];
    }
  }
  REQUIRE(rays.lines.size() == bins.size());
  std::vector<int> expected, actual;
  for (const auto& [key, count] : bins) expected.push_back(count);
  for (std::size_t l = 0; l < rays.lines.size(); ++l) {
    actual.push_back(static_cast<int>(rays.line_begin[l + 1] - rays.line_begin[l]));
  }
  std::sort(expected.begin(), expected.end());
  std::sort(actual.begin(), actual.end());
  CHECK(expected == actual);
}

TEST_CASE("axis-aligned slice through a 1x4 field") {
  const Heightfield f = flat(1, 4);
  const FieldExtent ext = FieldExtent::of(f);
  const CameraRays rays = make_camera_rays({45, 180, 4, {}}, ext);
  REQUIRE(rays.lines.size() == 4);  // one per pixel row, all crossing the single bar row
  const SliceCrossSection s = slice_heightfield(f, rays.lines[0], ext);
  REQUIRE(s.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.cum_widths[i + 1] - s.cum_widths[i] == doctest::Approx(1.0).epsilon(1e-12));
  // azimuth 180 travels toward +x: strips in column order
  for (std::size_t i = 0; i < 4; ++i) CHECK(s.source_cells[i] == i);
}

TEST_CASE("diagonal slice through cell centers of a 2x2 field") {
  const Heightfield f = flat(2, 2);
  const FieldExtent ext = FieldExtent::of(f);
  SliceLine line;
  line.direction = {std::sqrt(0.5), std::sqrt(0.5)};
  line.offset = 0.0;  // the main diagonal passes through both diagonal cell centers
  line.length = 2.0 * std::sqrt(2.0);
  const SliceCrossSection s = slice_heightfield(f, line, ext);
  REQUIRE(s.size() == 2);
  CHECK(s.cum_widths[1] == doctest::Approx(std::sqrt(2.0)));
  CHECK(s.cum_widths[2] == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(s.source_cells[0] == 0);
  CHECK(s.source_cells[1] == 3);
}

TEST_CASE("slice widths match a dense point-sampling oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int rows = 2 + static_cast<int>(u(rng) * 10), cols = 2 + static_cast<int>(u(rng) * 10);
    const double w = 0.5 + u(rng);
    const Heightfield f = Heightfield::uniform(rows, cols, w, 0, 4, 1, {});
    const FieldExtent ext = FieldExtent::of(f);
    const ViewSpec view{30 + 50 * u(rng), 360 * u(rng), 16, {}};
    const CameraRays rays = make_camera_rays(view, ext);
    const SliceLine& line = rays.lines[static_cast<std::size_t>(u(rng) * rays.lines.size())];
    const SliceCrossSection s = slice_heightfield(f, line, ext);
    REQUIRE(!s.empty());
    // slicing partition
    CHECK(std::abs(s.cum_widths.back() - line.length) <= 1e-9 * line.length);
    std::map<std::size_t, double> lengths;
    for (std::size_t i = 0; i < s.size(); ++i) lengths[s.source_cells[i]] += s.cum_widths[i + 1] - s.cum_widths[i];
    // oracle: 10^4 points spread over a span that covers the footprint, cell-membership counting
    const double span = 2.0 * std::hypot(f.extent_x(), f.extent_y());
    const Vec2 n{-line.direction.y, line.direction.x};
    const Vec2 c{line.offset * n.x, line.offset * n.y};
    const int samples = 10000;
    const double dt = 2.0 * span / samples;
    std::map<std::size_t, double> oracle;
    for (int k = 0; k < samples; ++k) {
      const double t = -span + (k + 0.5) * dt;
      const double x = c.x + t * line.direction.x, y = c.y + t * line.direction.y;
      if (x < 0 || y < 0 || x >= f.extent_x() || y >= f.extent_y()) continue;
      oracle[f.index(static_cast<int>(y / w), static_cast<int>(x / w))] += dt;
    }
    for (const auto& [cell, len] : lengths) CHECK(std::abs(oracle[cell] - len) <= 0.01 * w + 2 * dt);
    for (const auto& [cell, len] : oracle) {
      if (len > 2 * dt) CHECK(lengths.count(cell) == 1);
    }
  }
}

TEST_CASE("backtrace boundaries") {
  SliceCrossSection s;
  s.heights = {1, 1};
  s.cum_widths = {0, 1, 2};
  s.colors = {{}, {}};
  s.source_cells = {0, 1};
  const auto y = backtrace_boundaries(s, -1.0);
  REQUIRE(y.size() == 3);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == 2.0);
  CHECK(y[2] == 3.0);

  // near-vertical ray: y_0 = h_0, y_i = h_{i-1}
  s.heights = {1.5, 0.5, 2.0};
  s.cum_widths = {0, 1, 2, 3};
  const auto v = backtrace_boundaries(s, -1e-12);
  CHECK(v[0] == doctest::Approx(1.5));
  CHECK(v[1] == doctest::Approx(1.5));
  CHECK(v[2] == doctest::Approx(0.5));
  CHECK(v[3] == doctest::Approx(2.0));

  CHECK_THROWS_AS(backtrace_boundaries(s, 0.0), GeometryError);
  CHECK_THROWS_AS(backtrace_boundaries(s, 0.5), GeometryError);
}

TEST_CASE("backtrace equivariance under a height shift") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> q(0, 64);
  for (int trial = 0; trial < 50; ++trial) {
    SliceCrossSection s;
    double w = 0;
    s.cum_widths.push_back(0);
    for (int i = 0; i < 6; ++i) {
      s.heights.push_back(q(rng) / 16.0);  // dyadic values keep the sums exact
      w += (1 + q(rng)) / 32.0;
      s.cum_widths.push_back(w);
    }
    const double slope = -(1 + q(rng)) / 16.0, c = q(rng) / 8.0;
    const auto y = backtrace_boundaries(s, slope);
    for (double& h : s.heights) h += c;
    const auto y2 = backtrace_boundaries(s, slope);
    for (std::size_t i = 0; i < y.size(); ++i) CHECK(y2[i] == y[i] + c);
  }
}

TEST_CASE("monotonic cummax") {
  CHECK(monotonic_cummax(std::vector<double>{1, 3, 2, 5}) == std::vector<double>{1, 3, 3, 5});
  CHECK(monotonic_cummax(std::vector<double>{1, 2, 3}) == std::vector<double>{1, 2, 3});
  CHECK(monotonic_cummax(std::vector<double>{5, 1, 1, 1}) == std::vector<double>{5, 5, 5, 5});
  std::vector<double> out(4);
  std::vector<int> arg(4);
  std::vector<double> y{2, 2, 1, 3};
  monotonic_cummax(y, out, arg);
  CHECK(arg == std::vector<int>{0, 0, 0, 3});  // ties route to the first index
  CHECK_THROWS_AS(monotonic_cummax(std::vector<double>{}), InvalidArgument);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> r(10);
    for (double& x : r) x = u(rng);
    const auto m = monotonic_cummax(r);
    CHECK(monotonic_cummax(m) == m);
    for (std::size_t i = 0; i < r.size(); ++i) {
      CHECK(m[i] >= r[i]);
      if (i) CHECK(m[i] >= m[i - 1]);
    }
  }
}

TEST_CASE("slice line order does not change rendered pixels") {
  const Heightfield f = oracle::random_field(8, 8, 21);
  const ViewSpec view{40, 123, 16, {}};
  const ViewGeometry g = ViewGeometry::build(view, FieldExtent::of(f), 1);
  // reverse the line order, renumbering rays accordingly
  ViewGeometry r = g;
  const std::size_t L = g.rays.lines.size();
  r.rays.rays.clear();
  r.rays.line_begin = {0};
  r.rays.lines.clear();
  r.slices.clear();
  for (std::size_t k = 0; k < L; ++k) {
    const std::size_t l = L - 1 - k;
    SliceLine line = g.rays.lines[l];
    line.id = static_cast<int>(k);
    r.rays.lines.push_back(line);
    r.slices.push_back(g.slices[l]);
    for (std::size_t i = g.rays.line_begin[l]; i < g.rays.line_begin[l + 1]; ++i) {
      CameraRay ray = g.rays.rays[i];
      ray.line = static_cast<int>(k);
      r.rays.rays.push_back(ray);
    }
    r.rays.line_begin.push_back(r.rays.rays.size());
  }
  const HeavisideSpec spec{HeavisideKind::tanh, 20, 0};
  CHECK(render_view(f, g, spec, {}).image == render_view(f, r, spec, {}).image);
  CHECK(render_hard(f, g, {}).image == render_hard(f, r, {}).image);
}
