#include "hfa/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "slice_eval.hpp"

namespace hfa {

GradientSet GradientSet::zeros(const Heightfield& field) {
  GradientSet g;
  g.rows = field.rows;
  g.cols = field.cols;
  g.d_heights.assign(field.size(), 0.0);
  g.d_colors.assign(field.size(), Rgb{});
  return g;
}

bool GradientSet::all_finite() const {
  for (double v : d_heights) {
    if (!std::isfinite(v)) return false;
  }
  for (const Rgb& c : d_colors) {
    if (!std::isfinite(c.r) || !std::isfinite(c.g) || !std::isfinite(c.b)) return false;
  }
  return true;
}

namespace {

std::string pixel_name(int view, int pixel, int m) {
  std::ostringstream s;
  s << "view " << view << " pixel (" << pixel / m << "," << pixel % m << ")";
  return s.str();
}

void check_finite(double v, int view, int pixel, int m, std::size_t strip) {
  if (!std::isfinite(v)) {
    throw NumericError("non-finite gradient at " + pixel_name(view, pixel, m) + " strip " +
                       std::to_string(strip));
  }
}

// Forward pass of one view: unclamped per-pixel colors averaged over samples.
std::vector<Rgb> forward_view(const Heightfield& field, const ViewGeometry& geometry,
                              const HeavisideSpec& spec, const RenderSettings& settings, int view,
                              std::vector<std::uint8_t>& miss) {
  const CameraRays& cr = geometry.rays;
  const int m = cr.image_size;
  const FieldExtent extent = FieldExtent::of(field, settings.tiling);
  std::vector<Rgb> sum(static_cast<std::size_t>(m) * m);
  miss.assign(sum.size(), 1);
  const double inv_samples = 1.0 / (cr.samples * cr.samples);

  if (cr.nadir) {
    for (const CameraRay& r : cr.rays) {
      sum[r.pixel] += field.colors[cell_at(extent, r.ground)];
      miss[r.pixel] = 0;
    }
  } else {
    const double inv_scale = 1.0 / field.height_range();
    detail::LineState line;
    detail::Scratch scratch;
    for (std::size_t l = 0; l < cr.lines.size(); ++l) {
      const SliceGeometry& sg = geometry.slices[l];
      if (sg.source_cells.empty()) {
        for (std::size_t k = cr.line_begin[l]; k < cr.line_begin[l + 1]; ++k) {
          sum[cr.rays[k].pixel] += settings.background;
        }
        continue;
      }
      detail::prepare_line(field, sg, -cr.tan_elevation, line);
      for (std::size_t k = cr.line_begin[l]; k < cr.line_begin[l + 1]; ++k) {
        const CameraRay& r = cr.rays[k];
        const double o = r.ray.intercept;
        const std::uint64_t key = detail::ray_key(settings.sample_counter, view, r.pixel, r.sample);
        sum[r.pixel] += detail::shade(line, o, spec, inv_scale, settings.background, key, scratch);
        if (std::upper_bound(line.yt.begin() + 1, line.yt.end(), o) != line.yt.end()) miss[r.pixel] = 0;
      }
    }
  }
  for (Rgb& c : sum) c = c * inv_samples;
  return sum;
}

}  // namespace

BackwardResult backward(const Heightfield& field, std::span<const ViewSpec> views,
                        const HeavisideSpec& spec, const LossConfig& cfg,
                        const RenderSettings& settings, const BackwardOptions& options) {
  std::vector<ViewGeometry> geometry;
  geometry.reserve(views.size());
  for (const ViewSpec& v : views) {
    geometry.push_back(ViewGeometry::build(v, FieldExtent::of(field, settings.tiling), settings.samples));
  }
  return backward(field, views, geometry, spec, cfg, settings, options);
}

BackwardResult backward(const Heightfield& field, std::span<const ViewSpec> views,
                        std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
                        const LossConfig& cfg, const RenderSettings& settings,
                        const BackwardOptions& options) {
  field.validate();
  spec.validate();
  cfg.validate();
  if (views.empty()) throw InvalidArgument("backward: at least one view required");
  if (geometry.size() != views.size()) throw InvalidArgument("backward: one geometry per view required");

  BackwardResult res;
  res.grad = GradientSet::zeros(field);
  const FieldExtent extent = FieldExtent::of(field, settings.tiling);
  const double inv_scale = 1.0 / field.height_range();
  const int m = views[0].image_size;
  const double norm = 1.0 / (3.0 * m * m * static_cast<double>(views.size()));

  std::vector<Image> desired;
  std::vector<std::vector<std::uint8_t>> masks(views.size());
  std::vector<std::vector<Rgb>> d_pixel(views.size());

  for (std::size_t v = 0; v < views.size(); ++v) {
    const ViewSpec& view = views[v];
    if (view.image_size != m) throw InvalidArgument("backward: all views must share image_size");
    if (view.desired.width() != m || view.desired.height() != m) {
      throw InvalidArgument("backward: view " + std::to_string(v) + " has no m x m desired image");
    }
    if (geometry[v].rays.image_size != m || geometry[v].rays.samples != settings.samples) {
      throw InvalidArgument("backward: geometry does not match the view");
    }
    std::vector<Rgb> raw = forward_view(field, geometry[v], spec, settings, static_cast<int>(v), masks[v]);
    Image img(m, m);
    d_pixel[v].assign(raw.size(), Rgb{});
    for (std::size_t p = 0; p < raw.size(); ++p) {
      img[p] = clamp01(raw[p]);
      if (cfg.background_policy == BackgroundPolicy::mask && masks[v][p]) continue;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        if (raw[p][ch] < 0.0 || raw[p][ch] > 1.0) continue;  // clamped: no gradient
        d_pixel[v][p][ch] = 2.0 * (img[p][ch] - view.desired[p][ch]) * norm;
      }
    }
    res.renders.push_back(std::move(img));
    desired.push_back(view.desired);
  }

  res.loss.mse = mse_loss(res.renders, desired, masks, cfg.background_policy);
  if (cfg.barrier_enabled) res.loss.barrier = barrier_loss(field);
  if (cfg.neighbor_enabled) res.loss.neighbor = neighbor_loss(field, cfg.neighbor_epsilon);
  res.loss.total = combine_loss(res.loss, cfg, field.size());

  detail::LineState line;
  detail::Scratch scratch;
  std::vector<double> dh;
  std::vector<Rgb> dc;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const CameraRays& cr = geometry[v].rays;
    const double inv_samples = 1.0 / (cr.samples * cr.samples);
    if (cr.nadir) {
      for (const CameraRay& r : cr.rays) {
        res.grad.d_colors[cell_at(extent, r.ground)] += d_pixel[v][r.pixel] * inv_samples;
      }
      continue;
    }
    for (std::size_t l = 0; l < cr.lines.size(); ++l) {
      const SliceGeometry& sg = geometry[v].slices[l];
      if (sg.source_cells.empty()) continue;
      detail::prepare_line(field, sg, -cr.tan_elevation, line);
      const std::size_t n = line.n;
      dh.assign(n, 0.0);
      dc.assign(n, Rgb{});
      for (std::size_t k = cr.line_begin[l]; k < cr.line_begin[l + 1]; ++k) {
        const CameraRay& r = cr.rays[k];
        const Rgb gp = d_pixel[v][r.pixel] * inv_samples;
        if (gp == Rgb{}) continue;
        const double o = r.ray.intercept;
        const std::uint64_t key = detail::ray_key(settings.sample_counter, static_cast<int>(v), r.pixel, r.sample);
        detail::shade_all(line, o, spec, inv_scale, key, scratch);
        const std::vector<double>& g = scratch.g;
        const std::vector<double>& dg = scratch.dg;
        for (std::size_t s = 0; s < n; ++s) {
          const double w = g[s] - g[s + 1];
          if (w != 0.0) dc[s] += gp * w;
        }
        for (std::size_t i = 1; i <= n; ++i) {
          if (dg[i] == 0.0) continue;
          const Rgb coeff = i < n ? line.colors[i] - line.colors[i - 1] : settings.background - line.colors[n - 1];
          const double dot_c = gp.r * coeff.r + gp.g * coeff.g + gp.b * coeff.b;
          if (dot_c == 0.0) continue;
          const double d = -dot_c * dg[i] * inv_scale;
          check_finite(d, static_cast<int>(v), r.pixel, m, i);
          // y_j is set by h_{j-1} for j >= 1 and by h_0 for j = 0
          const int j = line.arg[i];
          dh[j >= 1 ? static_cast<std::size_t>(j - 1) : 0] += d;
        }
      }
      for (std::size_t s = 0; s < n; ++s) {
        const std::size_t cell = sg.source_cells[s];
        res.grad.d_heights[cell] += dh[s];
        res.grad.d_colors[cell] += dc[s];
      }
      if (options.keep_slice_gradients) {
        res.slices.push_back(SliceGradient{static_cast<int>(v), static_cast<int>(l), sg.source_cells, dh, dc});
      }
    }
  }

  const double n_bars = static_cast<double>(field.size());
  if (cfg.barrier_enabled && cfg.barrier_weight != 0.0) {
    const std::vector<double> gb = barrier_gradient(field);
    for (std::size_t i = 0; i < gb.size(); ++i) res.grad.d_heights[i] += cfg.barrier_weight * gb[i] / n_bars;
  }
  if (cfg.neighbor_enabled && cfg.neighbor_weight != 0.0) {
    const std::vector<double> gn = neighbor_gradient(field, cfg.neighbor_epsilon);
    for (std::size_t i = 0; i < gn.size(); ++i) res.grad.d_heights[i] += cfg.neighbor_weight * gn[i] / n_bars;
  }
  if (!std::isfinite(res.loss.total)) throw NumericError("non-finite loss");
  if (!res.grad.all_finite()) throw NumericError("non-finite gradient after regularization");
  return res;
}

namespace {

double objective(const Heightfield& field, std::span<const ViewSpec> views,
                 std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
                 const LossConfig& cfg, const RenderSettings& settings) {
  std::vector<Image> rendered;
  std::vector<Image> desired;
  std::vector<std::vector<std::uint8_t>> masks;
  for (std::size_t v = 0; v < views.size(); ++v) {
    RenderOutput out = render_view(field, geometry[v], spec, settings, static_cast<int>(v));
    rendered.push_back(std::move(out.image));
    masks.push_back(std::move(out.miss_mask));
    desired.push_back(views[v].desired);
  }
  LossBreakdown parts;
  parts.mse = mse_loss(rendered, desired, masks, cfg.background_policy);
  if (cfg.barrier_enabled) parts.barrier = barrier_loss(field);
  if (cfg.neighbor_enabled) parts.neighbor = neighbor_loss(field, cfg.neighbor_epsilon);
  return combine_loss(parts, cfg, field.size());
}

// Running-argmax of every slice line of every view: the routing of height gradients.
std::vector<int> routing_signature(const Heightfield& field, std::span<const ViewGeometry> geometry) {
  std::vector<int> sig;
  std::vector<double> h, y, yt;
  std::vector<int> arg;
  for (const ViewGeometry& g : geometry) {
    if (g.rays.nadir) continue;
    for (const SliceGeometry& sl : g.slices) {
      const std::size_t n = sl.source_cells.size();
      if (n == 0) continue;
      h.resize(n);
      for (std::size_t i = 0; i < n; ++i) h[i] = field.heights[sl.source_cells[i]];
      y.resize(n + 1);
      yt.resize(n + 1);
      arg.resize(n + 1);
      backtrace_boundaries(h, sl.cum_widths, -g.rays.tan_elevation, y);
      monotonic_cummax(y, yt, arg);
      sig.insert(sig.end(), arg.begin(), arg.end());
    }
  }
  return sig;
}

}  // namespace

GradCheckReport grad_check(const Heightfield& field, std::span<const ViewSpec> views,
                           const HeavisideSpec& spec, const LossConfig& cfg,
                           const RenderSettings& settings, const GradCheckOptions& options) {
  if (options.probes < 1) throw InvalidArgument("grad_check needs at least one probe");
  std::vector<ViewGeometry> geometry;
  for (const ViewSpec& v : views) {
    geometry.push_back(ViewGeometry::build(v, FieldExtent::of(field, settings.tiling), settings.samples));
  }
  const BackwardResult base = backward(field, views, geometry, spec, cfg, settings);
  const double h_step = options.height_step * field.h_max;
  const double c_step = options.color_step;

  // candidate coordinates: 0..N-1 heights, N..4N-1 color channels
  const std::size_t n = field.size();
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    const double h = field.heights[i];
    if (h - h_step > field.h_min && h + h_step < field.h_max) candidates.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < 3; ++ch) {
      const double c = field.colors[i][ch];
      if (c - c_step >= 0.0 && c + c_step <= 1.0) candidates.push_back(n + 3 * i + ch);
    }
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  if (candidates.size() > static_cast<std::size_t>(options.probes)) candidates.resize(options.probes);

  GradCheckReport report;
  Heightfield probe = field;
  auto central = [&](double& param, double step) {
    const double keep = param;
    param = keep + step;
    const double up = objective(probe, views, geometry, spec, cfg, settings);
    param = keep - step;
    const double down = objective(probe, views, geometry, spec, cfg, settings);
    param = keep;
    return (up - down) / (2.0 * step);
  };

  double sum_rel = 0.0;
  std::size_t smooth = 0;
  for (std::size_t id : candidates) {
    GradProbe p;
    double* param = nullptr;
    double step = 0.0;
    std::ostringstream name;
    if (id < n) {
      param = &probe.heights[id];
      step = h_step;
      p.analytic = base.grad.d_heights[id];
      name << "h[" << id / field.cols << "," << id % field.cols << "]";
    } else {
      const std::size_t cell = (id - n) / 3;
      const std::size_t ch = (id - n) % 3;
      param = &probe.colors[cell][ch];
      step = c_step;
      p.analytic = base.grad.d_colors[cell][ch];
      name << "c[" << cell / field.cols << "," << cell % field.cols << "]." << "rgb"[ch];
    }
    p.coordinate = name.str();
    if (id < n) {
      // a cummax switch inside the stencil makes the loss non-differentiable there
      const double keep = *param;
      *param = keep + step;
      const auto up = routing_signature(probe, geometry);
      *param = keep - step;
      const auto down = routing_signature(probe, geometry);
      *param = keep;
      p.crosses_tie = up != down;
    }
    p.numeric = central(*param, step);
    const double half = central(*param, 0.5 * step);
    const double denom = std::max({std::abs(p.analytic), std::abs(p.numeric), options.abs_floor});
    p.rel_error = std::abs(p.analytic - p.numeric) / denom;
    p.high_curvature = std::abs(p.numeric - half) > 0.1 * std::max({std::abs(p.numeric), std::abs(half), options.abs_floor});
    if (p.high_curvature) ++report.curvature_flags;
    report.max_rel_error_all = std::max(report.max_rel_error_all, p.rel_error);
    if (p.crosses_tie) {
      ++report.tie_crossings;
      report.probes.push_back(std::move(p));
      continue;
    }
    ++smooth;
    sum_rel += p.rel_error;
    if (report.worst.empty() || p.rel_error > report.max_rel_error) {
      report.max_rel_error = p.rel_error;
      report.worst = p.coordinate;
    }
    report.probes.push_back(std::move(p));
  }
  if (smooth > 0) report.mean_rel_error = sum_rel / static_cast<double>(smooth);
  return report;
}

void GradCheckReport::write_text(std::ostream& os) const {
  os << "probes " << probes.size() << "\n";
  os << "max_rel_error " << max_rel_error << "\n";
  os << "mean_rel_error " << mean_rel_error << "\n";
  os << "worst " << (worst.empty() ? "-" : worst) << "\n";
  os << "curvature_flags " << curvature_flags << "\n";
  os << "tie_crossings " << tie_crossings << "\n";
  os << "max_rel_error_all " << max_rel_error_all << "\n";
  if (curvature_flags > 0) {
    os << "note: large curvature at " << curvature_flags
       << " coordinates; finite differences are unreliable there\n";
  }
}

void GradCheckReport::write_csv(std::ostream& os) const {
  os << "coordinate,analytic,numeric,rel_error,high_curvature,crosses_tie\n";
  const auto old = os.precision(17);
  for (const GradProbe& p : probes) {
    os << p.coordinate << "," << p.analytic << "," << p.numeric << "," << p.rel_error << ","
       << (p.high_curvature ? 1 : 0) << "," << (p.crosses_tie ? 1 : 0) << "\n";
  }
  os.precision(old);
}

}  // namespace hfa
