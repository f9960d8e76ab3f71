#include "hfa/render.hpp"

#include <algorithm>
#include <cmath>

#include "hfa/kernels.hpp"
#include "slice_eval.hpp"

namespace hfa {
namespace detail {

void prepare_line(const Heightfield& field, const SliceGeometry& geometry, double slope,
                  LineState& line) {
  const std::size_t n = geometry.source_cells.size();
  line.n = n;
  line.widths = &geometry.cum_widths;
  line.cells = &geometry.source_cells;
  line.heights.resize(n);
  line.colors.resize(n);
  line.changes.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cell = geometry.source_cells[i];
    line.heights[i] = field.heights[cell];
    line.colors[i] = field.colors[cell];
    if (i > 0 && !(line.colors[i] == line.colors[i - 1])) line.changes.push_back(i);
  }
  if (n == 0) return;
  line.y.resize(n + 1);
  line.yt.resize(n + 1);
  line.arg.resize(n + 1);
  backtrace_boundaries(line.heights, geometry.cum_widths, slope, line.y);
  monotonic_cummax(line.y, line.yt, line.arg);
}

std::uint64_t ray_key(std::uint64_t counter, int view, int pixel, int sample) {
  std::uint64_t k = mix_key(counter, static_cast<std::uint64_t>(view));
  k = mix_key(k, static_cast<std::uint64_t>(pixel));
  return mix_key(k, static_cast<std::uint64_t>(sample));
}

void eval_steps(const HeavisideSpec& spec, double inv_scale, double o, const double* thr,
                const std::size_t* idx, std::size_t n, std::uint64_t base_key, double* g, double* dg) {
  const kernels::Table& kt = kernels::active();
  switch (spec.kind) {
    case HeavisideKind::tanh:
      kt.tanh_step(spec.k, inv_scale, o, thr, n, g, dg);
      return;
    case HeavisideKind::circle:
      kt.circle_step(spec.k, inv_scale, o, thr, n, g, dg);
      return;
    default:
      break;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double x = (o - thr[j]) * inv_scale;
    if (spec.stochastic()) {
      const double p = heaviside_probability(x, spec);
      const double u = uniform_from_key(mix_key(spec.seed, mix_key(base_key, idx[j])));
      g[j] = u < p ? 1.0 : 0.0;
    } else {
      g[j] = heaviside_probability(x, spec);
    }
    if (dg) dg[j] = heaviside_derivative(x, spec);
  }
}

Rgb shade(const LineState& line, double o, const HeavisideSpec& spec, double inv_scale,
          const Rgb& background, std::uint64_t base_key, Scratch& s) {
  const std::size_t n = line.n;
  const std::size_t count = line.changes.size() + 1;
  s.thr.resize(count);
  s.idx.resize(count);
  s.g.resize(count);
  for (std::size_t j = 0; j < line.changes.size(); ++j) {
    s.idx[j] = line.changes[j];
    s.thr[j] = line.yt[line.changes[j]];
  }
  s.idx[count - 1] = n;
  s.thr[count - 1] = line.yt[n];
  eval_steps(spec, inv_scale, o, s.thr.data(), s.idx.data(), count, base_key, s.g.data(), nullptr);

  Rgb out = line.colors[0];
  for (std::size_t j = 0; j < line.changes.size(); ++j) {
    const std::size_t i = line.changes[j];
    out += (line.colors[i] - line.colors[i - 1]) * s.g[j];
  }
  out += (background - line.colors[n - 1]) * s.g[count - 1];
  return out;
}

void shade_all(const LineState& line, double o, const HeavisideSpec& spec, double inv_scale,
               std::uint64_t base_key, Scratch& s) {
  const std::size_t n = line.n;
  s.thr.resize(n);
  s.idx.resize(n);
  s.g.resize(n + 1);
  s.dg.resize(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    s.idx[i - 1] = i;
    s.thr[i - 1] = line.yt[i];
  }
  s.g[0] = 1.0;
  s.dg[0] = 0.0;
  eval_steps(spec, inv_scale, o, s.thr.data(), s.idx.data(), n, base_key, s.g.data() + 1,
             s.dg.data() + 1);
}

}  // namespace detail

namespace {

double heaviside_at(double x, const HeavisideSpec& spec, std::uint64_t key, std::size_t i) {
  if (!spec.stochastic()) return heaviside_probability(x, spec);
  const double u = uniform_from_key(mix_key(spec.seed, mix_key(key, i)));
  return u < heaviside_probability(x, spec) ? 1.0 : 0.0;
}

void check_pixel_inputs(const SliceCrossSection& slice, std::span<const double> y_tilde,
                        const PixelEvalOptions& opts) {
  if (slice.empty()) throw InvalidArgument("pixel_color: empty slice");
  if (y_tilde.size() != slice.size() + 1) throw InvalidArgument("pixel_color: need n+1 intercepts");
  if (!(opts.length_scale > 0.0)) throw InvalidArgument("pixel_color: length_scale must be positive");
}

}  // namespace

Rgb pixel_color_product(const SliceCrossSection& slice, std::span<const double> y_tilde,
                        const Ray2D& ray, const HeavisideSpec& spec, const PixelEvalOptions& opts) {
  spec.validate();
  check_pixel_inputs(slice, y_tilde, opts);
  const std::size_t n = slice.size();
  std::vector<double> g(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    g[i] = heaviside_at((ray.intercept - y_tilde[i]) / opts.length_scale, spec, opts.sample_key, i);
  }
  if (opts.open_front) g[0] = 1.0;
  Rgb out{};
  for (std::size_t i = 0; i < n; ++i) out += slice.colors[i] * (g[i] - g[i + 1]);
  out += opts.background * (1.0 - g[0] + g[n]);
  return out;
}

Rgb pixel_color_telescoped(const SliceCrossSection& slice, std::span<const double> y_tilde,
                           const Ray2D& ray, const HeavisideSpec& spec, const PixelEvalOptions& opts) {
  spec.validate();
  check_pixel_inputs(slice, y_tilde, opts);
  const std::size_t n = slice.size();
  auto g = [&](std::size_t i) {
    if (i == 0 && opts.open_front) return 1.0;
    return heaviside_at((ray.intercept - y_tilde[i]) / opts.length_scale, spec, opts.sample_key, i);
  };
  Rgb out = (slice.colors[0] - opts.background) * g(0);
  for (std::size_t i = 1; i < n; ++i) out += (slice.colors[i] - slice.colors[i - 1]) * g(i);
  out += (opts.background - slice.colors[n - 1]) * g(n);
  return out + opts.background;
}

SegmentedColors SegmentedColors::from_field(const Heightfield& field, int segments) {
  if (segments < 1) throw InvalidArgument("segments_per_bar must be >= 1");
  SegmentedColors s;
  s.segments = segments;
  s.bands.reserve(field.size() * segments);
  for (const Rgb& c : field.colors) s.bands.insert(s.bands.end(), segments, c);
  return s;
}

int band_of(const HitRecord& hit, double bar_height, int segments) {
  if (hit.face != HitFace::side || !(bar_height > 0.0)) return segments - 1;
  const int s = static_cast<int>(std::floor(hit.z / bar_height * segments));
  return std::clamp(s, 0, segments - 1);
}

ViewGeometry ViewGeometry::build(const ViewSpec& view, const FieldExtent& extent, int samples) {
  ViewGeometry g;
  g.rays = make_camera_rays(view, extent, samples);
  g.slices.reserve(g.rays.lines.size());
  for (const SliceLine& line : g.rays.lines) g.slices.push_back(slice_geometry(line, extent));
  return g;
}

namespace {

void check_geometry(const Heightfield& field, const ViewGeometry& geometry, const RenderSettings& s) {
  field.validate();
  if (s.samples != geometry.rays.samples) throw InvalidArgument("render: geometry built for another sample count");
}

RenderOutput blank_output(int m) {
  RenderOutput out;
  out.image = Image(m, m);
  out.hit_index.assign(static_cast<std::size_t>(m) * m, kMiss);
  out.miss_mask.assign(static_cast<std::size_t>(m) * m, 1);
  return out;
}

// Averages per-sample colors into pixels.
struct Accumulator {
  std::vector<Rgb> sum;
  std::vector<int> first_sample_hit;
  double inv;

  Accumulator(int m, int samples)
      : sum(static_cast<std::size_t>(m) * m), first_sample_hit(sum.size(), kMiss),
        inv(1.0 / (samples * samples)) {}
};

void finish(RenderOutput& out, const Accumulator& acc) {
  for (std::size_t p = 0; p < acc.sum.size(); ++p) {
    out.image[p] = clamp01(acc.sum[p] * acc.inv);
  }
}

}  // namespace

RenderOutput render_view(const Heightfield& field, const ViewSpec& view, const HeavisideSpec& spec,
                         const RenderSettings& settings) {
  const ViewGeometry g =
      ViewGeometry::build(view, FieldExtent::of(field, settings.tiling), settings.samples);
  return render_view(field, g, spec, settings);
}

RenderOutput render_view(const Heightfield& field, const ViewGeometry& geometry,
                         const HeavisideSpec& spec, const RenderSettings& settings, int view_index) {
  spec.validate();
  check_geometry(field, geometry, settings);
  const CameraRays& cr = geometry.rays;
  const int m = cr.image_size;
  RenderOutput out = blank_output(m);
  Accumulator acc(m, cr.samples);
  const FieldExtent extent = FieldExtent::of(field, settings.tiling);

  if (cr.nadir) {
    for (const CameraRay& r : cr.rays) {
      const std::size_t cell = cell_at(extent, r.ground);
      acc.sum[r.pixel] += field.colors[cell];
      out.miss_mask[r.pixel] = 0;
      if (r.sample == 0) out.hit_index[r.pixel] = static_cast<int>(cell);
    }
    finish(out, acc);
    return out;
  }

  const double inv_scale = 1.0 / field.height_range();
  detail::LineState line;
  detail::Scratch scratch;
  for (std::size_t l = 0; l < cr.lines.size(); ++l) {
    const SliceGeometry& sg = geometry.slices[l];
    const std::size_t b = cr.line_begin[l];
    const std::size_t e = cr.line_begin[l + 1];
    if (sg.source_cells.empty()) {
      for (std::size_t k = b; k < e; ++k) acc.sum[cr.rays[k].pixel] += settings.background;
      continue;
    }
    detail::prepare_line(field, sg, -cr.tan_elevation, line);
    for (std::size_t k = b; k < e; ++k) {
      const CameraRay& r = cr.rays[k];
      const double o = r.ray.intercept;
      const std::uint64_t key = detail::ray_key(settings.sample_counter, view_index, r.pixel, r.sample);
      acc.sum[r.pixel] += detail::shade(line, o, spec, inv_scale, settings.background, key, scratch);
      // hit bookkeeping follows the exact step
      const auto it = std::upper_bound(line.yt.begin() + 1, line.yt.end(), o);
      const std::size_t hit = static_cast<std::size_t>(it - (line.yt.begin() + 1));
      if (hit < line.n) {
        out.miss_mask[r.pixel] = 0;
        if (r.sample == 0) out.hit_index[r.pixel] = static_cast<int>((*line.cells)[hit]);
      }
    }
  }
  finish(out, acc);
  return out;
}

RenderOutput render_hard(const Heightfield& field, const ViewSpec& view, const RenderSettings& settings,
                         const SegmentedColors* segments, std::vector<HitRecord>* hits) {
  const ViewGeometry g =
      ViewGeometry::build(view, FieldExtent::of(field, settings.tiling), settings.samples);
  return render_hard(field, g, settings, segments, hits);
}

RenderOutput render_hard(const Heightfield& field, const ViewGeometry& geometry,
                         const RenderSettings& settings, const SegmentedColors* segments,
                         std::vector<HitRecord>* hits) {
  check_geometry(field, geometry, settings);
  if (segments && segments->bands.size() != field.size() * static_cast<std::size_t>(segments->segments)) {
    throw InvalidArgument("segmented colors do not match the field");
  }
  const CameraRays& cr = geometry.rays;
  const int m = cr.image_size;
  RenderOutput out = blank_output(m);
  Accumulator acc(m, cr.samples);
  const FieldExtent extent = FieldExtent::of(field, settings.tiling);
  if (hits) hits->clear();

  auto record = [&](const CameraRay& r, std::size_t cell, HitFace face, double z) {
    Rgb c = field.colors[cell];
    HitRecord h{r.pixel, r.sample, cell, face, z};
    if (segments) c = segments->band(cell, band_of(h, field.heights[cell], segments->segments));
    acc.sum[r.pixel] += c;
    out.miss_mask[r.pixel] = 0;
    if (r.sample == 0) out.hit_index[r.pixel] = static_cast<int>(cell);
    if (hits) hits->push_back(h);
  };

  if (cr.nadir) {
    for (const CameraRay& r : cr.rays) {
      const std::size_t cell = cell_at(extent, r.ground);
      record(r, cell, HitFace::top, field.heights[cell]);
    }
    finish(out, acc);
    return out;
  }

  detail::LineState line;
  for (std::size_t l = 0; l < cr.lines.size(); ++l) {
    const SliceGeometry& sg = geometry.slices[l];
    const std::size_t b = cr.line_begin[l];
    const std::size_t e = cr.line_begin[l + 1];
    if (sg.source_cells.empty()) {
      for (std::size_t k = b; k < e; ++k) acc.sum[cr.rays[k].pixel] += settings.background;
      continue;
    }
    detail::prepare_line(field, sg, -cr.tan_elevation, line);
    for (std::size_t k = b; k < e; ++k) {
      const CameraRay& r = cr.rays[k];
      const double o = r.ray.intercept;
      const auto it = std::upper_bound(line.yt.begin() + 1, line.yt.end(), o);
      const std::size_t s = static_cast<std::size_t>(it - (line.yt.begin() + 1));
      if (s >= line.n) {
        acc.sum[r.pixel] += settings.background;
        continue;
      }
      const double z_in = o - cr.tan_elevation * sg.cum_widths[s];
      if (z_in <= line.heights[s]) {
        record(r, sg.source_cells[s], HitFace::side, std::max(z_in, 0.0));
      } else {
        record(r, sg.source_cells[s], HitFace::top, line.heights[s]);
      }
    }
  }
  finish(out, acc);
  return out;
}

}  // namespace hfa
