#include "hfa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hfa {

FieldExtent FieldExtent::of(const Heightfield& field, int repeat) {
  if (repeat < 1 || repeat % 2 == 0) throw InvalidArgument("tiling repeat must be a positive odd number");
  return FieldExtent{field.rows, field.cols, field.strip_width, repeat};
}

std::size_t FieldExtent::source_cell(int row, int col) const {
  return static_cast<std::size_t>(row % rows) * cols + static_cast<std::size_t>(col % cols);
}

std::size_t cell_at(const FieldExtent& extent, Vec2 ground) {
  const int c = std::clamp(static_cast<int>(std::floor(ground.x / extent.strip_width)), 0,
                           extent.total_cols() - 1);
  const int r = std::clamp(static_cast<int>(std::floor(ground.y / extent.strip_width)), 0,
                           extent.total_rows() - 1);
  return extent.source_cell(r, c);
}

namespace {

struct Interval {
  double t_in = 0.0;
  double t_out = 0.0;
  bool hit = false;
};

// Parametric clip of p0 + t*u against [0,X] x [0,Y].
Interval clip_line(Vec2 p0, Vec2 u, double X, double Y) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  auto slab = [&](double p, double d, double extent) {
    if (d == 0.0) {
      if (p < 0.0 || p > extent) {
        lo = 1.0;
        hi = 0.0;
      }
      return;
    }
    double a = (0.0 - p) / d;
    double b = (extent - p) / d;
    if (a > b) std::swap(a, b);
    lo = std::max(lo, a);
    hi = std::min(hi, b);
  };
  slab(p0.x, u.x, X);
  slab(p0.y, u.y, Y);
  Interval iv;
  iv.t_in = lo;
  iv.t_out = hi;
  iv.hit = hi > lo;
  return iv;
}

Vec2 travel_direction(const ViewSpec& view) {
  const Vec3 d = view.direction();
  const double n = std::hypot(d.x, d.y);
  if (n == 0.0) return {1.0, 0.0};
  Vec2 u{d.x / n, d.y / n};
  // keep axis-aligned directions exact
  if (std::abs(u.x) < 1e-15) u = {0.0, u.y > 0 ? 1.0 : -1.0};
  if (std::abs(u.y) < 1e-15) u = {u.x > 0 ? 1.0 : -1.0, 0.0};
  return u;
}

}  // namespace

CameraRays make_camera_rays(const ViewSpec& view, const FieldExtent& extent, int samples) {
  if (samples < 1) throw InvalidArgument("samples per pixel axis must be >= 1");
  if (view.image_size < 1) throw InvalidArgument("view image_size must be positive");
  (void)view.direction();

  CameraRays out;
  out.nadir = view.is_nadir();
  out.image_size = view.image_size;
  out.samples = samples;

  const int m = view.image_size;
  const int big_m = m * extent.repeat;
  const int offset = m * (extent.repeat - 1) / 2;
  const double X = extent.total_x();
  const double Y = extent.total_y();
  const double px = X / big_m;
  const double py = Y / big_m;

  std::vector<CameraRay> rays;
  rays.reserve(static_cast<std::size_t>(m) * m * samples * samples);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      for (int a = 0; a < samples; ++a) {
        for (int b = 0; b < samples; ++b) {
          CameraRay r;
          r.pixel = i * m + j;
          r.sample = a * samples + b;
          const double fx = (b + 0.5) / samples;
          const double fy = (a + 0.5) / samples;
          r.ground = {(offset + j + fx) * px, (offset + i + fy) * py};
          rays.push_back(r);
        }
      }
    }
  }

  if (out.nadir) {
    out.tan_elevation = std::numeric_limits<double>::infinity();
    out.rays = std::move(rays);
    out.line_begin = {0, out.rays.size()};
    return out;
  }

  const double e = view.elevation_deg * std::numbers::pi / 180.0;
  out.tan_elevation = std::tan(e);
  const Vec2 u = travel_direction(view);
  const Vec2 n{-u.y, u.x};

  std::vector<double> q(rays.size());
  for (std::size_t k = 0; k < rays.size(); ++k) q[k] = dot(n, rays[k].ground);
  std::vector<std::size_t> order(rays.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });

  const double tol = 1e-9 * std::max(X, Y);
  out.rays.reserve(rays.size());
  std::size_t k = 0;
  while (k < order.size()) {
    const double q0 = q[order[k]];
    SliceLine line;
    line.id = static_cast<int>(out.lines.size());
    line.offset = q0;
    line.direction = u;
    const Vec2 p0{q0 * n.x, q0 * n.y};
    const Interval iv = clip_line(p0, u, X, Y);
    if (iv.hit) {
      line.entry = {p0.x + iv.t_in * u.x, p0.y + iv.t_in * u.y};
      line.length = iv.t_out - iv.t_in;
    } else {
      line.entry = p0;
      line.length = 0.0;
    }
    out.line_begin.push_back(out.rays.size());
    while (k < order.size() && q[order[k]] - q0 <= tol) {
      CameraRay r = rays[order[k]];
      r.line = line.id;
      r.slice_x = (r.ground.x - line.entry.x) * u.x + (r.ground.y - line.entry.y) * u.y;
      r.ray.slope = -out.tan_elevation;
      r.ray.intercept = out.tan_elevation * r.slice_x;
      out.rays.push_back(r);
      ++k;
    }
    out.lines.push_back(line);
  }
  out.line_begin.push_back(out.rays.size());
  return out;
}

SliceGeometry slice_geometry(const SliceLine& line, const FieldExtent& extent) {
  SliceGeometry g;
  if (!(line.length > 0.0)) return g;

  const double w = extent.strip_width;
  const int C = extent.total_cols();
  const int R = extent.total_rows();
  const Vec2 u = line.direction;
  // Re-derive the canonical point so crossings are computed from the same expression for
  // every resolution (keeps subdivided fields bit-identical).
  const Vec2 n{-u.y, u.x};
  const Vec2 p0{line.offset * n.x, line.offset * n.y};
  const Interval iv = clip_line(p0, u, extent.total_x(), extent.total_y());
  if (!iv.hit) return g;

  std::vector<double> ts;
  ts.reserve(static_cast<std::size_t>(C + R + 2));
  if (u.x != 0.0) {
    for (int k = 1; k < C; ++k) {
      const double t = (k * w - p0.x) / u.x;
      if (t > iv.t_in && t < iv.t_out) ts.push_back(t);
    }
  }
  if (u.y != 0.0) {
    for (int k = 1; k < R; ++k) {
      const double t = (k * w - p0.y) / u.y;
      if (t > iv.t_in && t < iv.t_out) ts.push_back(t);
    }
  }
  std::sort(ts.begin(), ts.end());
  ts.push_back(iv.t_out);

  const double eps = 1e-12 * std::max(extent.total_x(), extent.total_y());
  g.cum_widths.push_back(0.0);
  double t_prev = iv.t_in;
  for (double t : ts) {
    if (t - t_prev <= eps) continue;
    const double tm = 0.5 * (t_prev + t);
    const Vec2 mid{p0.x + tm * u.x, p0.y + tm * u.y};
    g.source_cells.push_back(cell_at(extent, mid));
    g.cum_widths.push_back(t - iv.t_in);
    t_prev = t;
  }
  return g;
}

SliceCrossSection slice_heightfield(const Heightfield& field, const SliceLine& line,
                                    const FieldExtent& extent) {
  SliceGeometry g = slice_geometry(line, extent);
  SliceCrossSection s;
  if (g.source_cells.empty()) return s;
  s.cum_widths = std::move(g.cum_widths);
  s.source_cells = std::move(g.source_cells);
  s.heights.reserve(s.source_cells.size());
  s.colors.reserve(s.source_cells.size());
  for (std::size_t cell : s.source_cells) {
    s.heights.push_back(field.heights[cell]);
    s.colors.push_back(field.colors[cell]);
  }
  return s;
}

void backtrace_boundaries(std::span<const double> heights, std::span<const double> cum_widths,
                          double ray_slope, std::span<double> out) {
  if (!(ray_slope < 0.0) || !std::isfinite(ray_slope)) {
    throw GeometryError("backtrace requires a finite descending slope; use the nadir path for vertical rays");
  }
  const std::size_t n = heights.size();
  if (n == 0) throw GeometryError("backtrace of an empty slice");
  if (cum_widths.size() != n + 1 || out.size() != n + 1) {
    throw InvalidArgument("backtrace: cum_widths/out must have n+1 entries");
  }
  out[0] = heights[0];
  for (std::size_t i = 1; i <= n; ++i) out[i] = heights[i - 1] - ray_slope * cum_widths[i];
}

std::vector<double> backtrace_boundaries(const SliceCrossSection& slice, double ray_slope) {
  std::vector<double> y(slice.size() + 1);
  backtrace_boundaries(slice.heights, slice.cum_widths, ray_slope, y);
  return y;
}

void monotonic_cummax(std::span<const double> y, std::span<double> out, std::span<int> argmax) {
  if (y.empty()) throw InvalidArgument("cummax of an empty sequence");
  double best = y[0];
  int best_i = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] > best) {
      best = y[i];
      best_i = static_cast<int>(i);
    }
    out[i] = best;
    if (!argmax.empty()) argmax[i] = best_i;
  }
}

std::vector<double> monotonic_cummax(std::span<const double> y) {
  std::vector<double> out(y.size());
  monotonic_cummax(y, out, {});
  return out;
}

}  // namespace hfa
