#include "hfa/objective.hpp"

#include <cmath>
#include <limits>

#include "hfa/kernels.hpp"

namespace hfa {

LossConfig LossConfig::none() {
  LossConfig c;
  c.barrier_enabled = false;
  c.neighbor_enabled = false;
  return c;
}

LossConfig LossConfig::barrier_only() {
  LossConfig c;
  c.neighbor_enabled = false;
  return c;
}

LossConfig LossConfig::smoothing_only() {
  LossConfig c;
  c.barrier_enabled = false;
  return c;
}

LossConfig LossConfig::both() { return LossConfig{}; }

void LossConfig::validate() const {
  if (!(barrier_weight >= 0.0) || !std::isfinite(barrier_weight)) {
    throw InvalidArgument("barrier_weight must be a finite nonnegative number");
  }
  if (!(neighbor_weight >= 0.0) || !std::isfinite(neighbor_weight)) {
    throw InvalidArgument("neighbor_weight must be a finite nonnegative number");
  }
  if (!(neighbor_epsilon > 0.0)) throw InvalidArgument("neighbor_epsilon must be positive");
}

double mse_loss(std::span<const Image> rendered, std::span<const Image> desired,
                std::span<const std::vector<std::uint8_t>> miss_masks, BackgroundPolicy policy) {
  if (rendered.empty() || rendered.size() != desired.size()) {
    throw InvalidArgument("mse_loss: rendered and desired sets must be nonempty and equally sized");
  }
  if (!miss_masks.empty() && miss_masks.size() != rendered.size()) {
    throw InvalidArgument("mse_loss: one miss mask per view required");
  }
  const int m = rendered[0].width();
  const kernels::Table& kt = kernels::active();
  double sum = 0.0;
  std::vector<std::uint8_t> keep;
  for (std::size_t v = 0; v < rendered.size(); ++v) {
    const Image& a = rendered[v];
    const Image& b = desired[v];
    if (a.width() != m || a.height() != m || b.width() != m || b.height() != m) {
      throw InvalidArgument("mse_loss: every image must be m x m with one common m");
    }
    const std::uint8_t* kp = nullptr;
    if (policy == BackgroundPolicy::mask && !miss_masks.empty()) {
      const auto& mask = miss_masks[v];
      if (mask.size() != a.size()) throw InvalidArgument("mse_loss: miss mask size mismatch");
      keep.resize(a.size() * 3);
      for (std::size_t p = 0; p < mask.size(); ++p) {
        const std::uint8_t k = mask[p] ? 0 : 1;
        keep[3 * p] = keep[3 * p + 1] = keep[3 * p + 2] = k;
      }
      kp = keep.data();
    }
    static_assert(sizeof(Rgb) == 3 * sizeof(double));
    sum += kt.squared_error_sum(reinterpret_cast<const double*>(a.pixels().data()),
                                reinterpret_cast<const double*>(b.pixels().data()), kp, a.size() * 3);
  }
  return sum / (3.0 * m * m * static_cast<double>(rendered.size()));
}

double barrier_loss(const Heightfield& field) {
  const double range = field.height_range();
  double sum = 0.0;
  for (double h : field.heights) {
    const double u = (h - field.h_min) / range;
    if (!(u > 0.0 && u < 1.0)) return std::numeric_limits<double>::infinity();
    sum -= std::log(1.0 - u) + std::log(u);
  }
  return sum;
}

std::vector<double> barrier_gradient(const Heightfield& field) {
  const double range = field.height_range();
  std::vector<double> g(field.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double u = (field.heights[i] - field.h_min) / range;
    if (!(u > 0.0 && u < 1.0)) throw NumericError("barrier violated at bar " + std::to_string(i));
    g[i] = (1.0 / (1.0 - u) - 1.0 / u) / range;
  }
  return g;
}

namespace {

template <class Fn>
void for_each_pair(const Heightfield& f, Fn&& fn) {
  for (int r = 0; r < f.rows; ++r) {
    for (int c = 0; c < f.cols; ++c) {
      if (c + 1 < f.cols) fn(f.index(r, c), f.index(r, c + 1));
      if (r + 1 < f.rows) fn(f.index(r, c), f.index(r + 1, c));
    }
  }
}

}  // namespace

double neighbor_loss(const Heightfield& field, double epsilon) {
  const double inv = 1.0 / field.height_range();
  double sum = 0.0;
  for_each_pair(field, [&](std::size_t a, std::size_t b) {
    const double d = (field.heights[a] - field.heights[b]) * inv;
    sum += std::sqrt(d * d + epsilon * epsilon) - epsilon;
  });
  return sum;
}

std::vector<double> neighbor_gradient(const Heightfield& field, double epsilon) {
  const double inv = 1.0 / field.height_range();
  std::vector<double> g(field.size(), 0.0);
  for_each_pair(field, [&](std::size_t a, std::size_t b) {
    const double d = (field.heights[a] - field.heights[b]) * inv;
    const double s = d / std::sqrt(d * d + epsilon * epsilon) * inv;
    g[a] += s;
    g[b] -= s;
  });
  return g;
}

double combine_loss(const LossBreakdown& parts, const LossConfig& cfg, std::size_t bar_count) {
  double total = parts.mse;
  const double n = static_cast<double>(bar_count);
  if (cfg.barrier_enabled && cfg.barrier_weight != 0.0) total += cfg.barrier_weight * parts.barrier / n;
  if (cfg.neighbor_enabled && cfg.neighbor_weight != 0.0) total += cfg.neighbor_weight * parts.neighbor / n;
  return total;
}

LossBreakdown total_loss(const Heightfield& field, std::span<const ViewSpec> views,
                         const HeavisideSpec& spec, const LossConfig& cfg,
                         const RenderSettings& settings) {
  cfg.validate();
  std::vector<Image> rendered;
  std::vector<Image> desired;
  std::vector<std::vector<std::uint8_t>> masks;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const ViewGeometry g = ViewGeometry::build(views[v], FieldExtent::of(field, settings.tiling), settings.samples);
    RenderOutput out = render_view(field, g, spec, settings, static_cast<int>(v));
    rendered.push_back(std::move(out.image));
    masks.push_back(std::move(out.miss_mask));
    desired.push_back(views[v].desired);
  }
  LossBreakdown parts;
  parts.mse = mse_loss(rendered, desired, masks, cfg.background_policy);
  if (cfg.barrier_enabled) parts.barrier = barrier_loss(field);
  if (cfg.neighbor_enabled) parts.neighbor = neighbor_loss(field, cfg.neighbor_epsilon);
  parts.total = combine_loss(parts, cfg, field.size());
  return parts;
}

double hard_mse(const Heightfield& field, std::span<const ViewSpec> views,
                const RenderSettings& settings) {
  std::vector<Image> rendered;
  std::vector<Image> desired;
  std::vector<std::vector<std::uint8_t>> masks;
  for (const ViewSpec& view : views) {
    RenderOutput out = render_hard(field, view, settings);
    rendered.push_back(std::move(out.image));
    masks.push_back(std::move(out.miss_mask));
    desired.push_back(view.desired);
  }
  return mse_loss(rendered, desired, masks, BackgroundPolicy::mask);
}

}  // namespace hfa
