#include "hfa/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "hfa/kernels.hpp"

namespace hfa {

std::string to_string(InitKind kind) {
  switch (kind) {
    case InitKind::flat: return "flat";
    case InitKind::vertical_wall: return "vertical_wall";
    case InitKind::horizontal_wall: return "horizontal_wall";
    case InitKind::cross: return "cross";
    case InitKind::random: return "random";
  }
  return "unknown";
}

InitKind parse_init_kind(std::string_view name) {
  if (name == "flat") return InitKind::flat;
  if (name == "vertical_wall") return InitKind::vertical_wall;
  if (name == "horizontal_wall") return InitKind::horizontal_wall;
  if (name == "cross") return InitKind::cross;
  if (name == "random") return InitKind::random;
  throw InvalidArgument("unknown init kind '" + std::string(name) + "'");
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::heights: return "heights";
    case Phase::colors: return "colors";
    case Phase::both: return "both";
  }
  return "unknown";
}

Phase parse_phase(std::string_view name) {
  if (name == "heights") return Phase::heights;
  if (name == "colors") return Phase::colors;
  if (name == "both") return Phase::both;
  throw InvalidArgument("unknown phase '" + std::string(name) + "'");
}

namespace {

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

std::vector<std::string> OptimizerConfig::problems() const {
  std::vector<std::string> p;
  if (total_steps < 0) p.push_back("total_steps must be >= 0");
  const auto& c = coarse_to_fine;
  if (!power_of_two(c.start_resolution)) p.push_back("start_resolution must be a power of two");
  if (!power_of_two(c.end_resolution)) p.push_back("end_resolution must be a power of two");
  if (c.start_resolution > c.end_resolution) p.push_back("start_resolution must not exceed end_resolution");
  if (c.start_resolution < 2) p.push_back("start_resolution must be >= 2");
  if (c.subdivide_every < 1) p.push_back("subdivide_every must be >= 1");
  if (bcd.height_steps < 1 || bcd.color_steps < 1) p.push_back("bcd step counts must be >= 1");
  const auto& a = annealing;
  if (!(a.t_max > a.t_min && a.t_min > 0.0)) p.push_back("annealing requires T_max > T_min > 0");
  if (!(a.cool_factor > 0.0 && a.cool_factor < 1.0)) p.push_back("cool_factor must lie in (0, 1)");
  if (a.every_n_steps < 1) p.push_back("annealing every_n_steps must be >= 1");
  if (!(a.neighbor_sigma >= 0.0)) p.push_back("neighbor_sigma must be >= 0");
  if (adam.lr_heights && !(*adam.lr_heights > 0.0)) p.push_back("lr_heights must be positive");
  if (!(adam.lr_colors > 0.0)) p.push_back("lr_colors must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) p.push_back("beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) p.push_back("beta2 must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) p.push_back("adam epsilon must be positive");
  if (heaviside != HeavisideKind::step && !(k_start > 0.0 && k_end > 0.0)) p.push_back("Heaviside k must be positive");
  if (!(geometry.strip_width_mm > 0.0)) p.push_back("strip_width_mm must be positive");
  if (!(geometry.h_min >= 0.0 && geometry.h_min < geometry.h_max)) p.push_back("height bounds must satisfy 0 <= h_min < h_max");
  if (tiling < 1 || tiling % 2 == 0) p.push_back("tiling must be a positive odd number");
  if (!(loss.barrier_weight >= 0.0)) p.push_back("barrier_weight must be >= 0");
  if (!(loss.neighbor_weight >= 0.0)) p.push_back("neighbor_weight must be >= 0");
  return p;
}

void OptimizerConfig::validate() const {
  auto p = problems();
  if (!p.empty()) throw ConfigError(std::move(p));
}

int OptimizerConfig::initial_resolution() const {
  return coarse_to_fine.enabled ? coarse_to_fine.start_resolution : coarse_to_fine.end_resolution;
}

double OptimizerConfig::strip_width_at(int resolution) const {
  return geometry.strip_width_mm * coarse_to_fine.start_resolution / resolution;
}

double OptimizerConfig::k_at(int step) const {
  if (total_steps <= 1) return k_start;
  const double f = std::clamp(static_cast<double>(step) / (total_steps - 1), 0.0, 1.0);
  return k_start + (k_end - k_start) * f;
}

double OptimizerConfig::lr_heights() const {
  return adam.lr_heights ? *adam.lr_heights : 0.05 * (geometry.h_max - geometry.h_min);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::string Rng::state() const {
  std::ostringstream s;
  s << engine_;
  return s.str();
}

void Rng::set_state(const std::string& text) {
  std::istringstream s(text);
  std::mt19937_64 e;
  s >> e;
  if (!s) throw InvalidArgument("malformed RNG state");
  engine_ = e;
}

void OptimizerState::reset_moments() {
  m_heights.assign(field.size(), 0.0);
  v_heights.assign(field.size(), 0.0);
  m_colors.assign(field.size() * 3, 0.0);
  v_colors.assign(field.size() * 3, 0.0);
  t_heights = 0;
  t_colors = 0;
}

Heightfield initial_field(InitKind kind, int resolution, double strip_width, double h_min,
                          double h_max, Rng& rng) {
  if (resolution < 2) throw InvalidArgument("initial_field: resolution must be >= 2");
  const Rgb gray{0.5, 0.5, 0.5};
  Heightfield f = Heightfield::uniform(resolution, resolution, strip_width, h_min, h_max, h_min, gray);
  const double half = 0.5 * (h_max - h_min);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      double& h = f.heights[f.index(r, c)];
      switch (kind) {
        case InitKind::flat:
          break;
        case InitKind::vertical_wall:
          if (c % 2 == 1) h += half;
          break;
        case InitKind::horizontal_wall:
          if (r % 2 == 1) h += half;
          break;
        case InitKind::cross:
          if (c % 2 == 1) h += half;
          if (r % 2 == 1) h += half;
          break;
        case InitKind::random:
          h = h_min + (h_max - h_min) * rng.uniform();
          break;
      }
    }
  }
  if (kind == InitKind::random) {
    for (Rgb& c : f.colors) c = {rng.uniform(), rng.uniform(), rng.uniform()};
  }
  return f;
}

Heightfield initial_field(InitKind kind, int resolution, const FieldGeometry& geometry,
                          std::uint64_t seed) {
  Rng rng(seed);
  return initial_field(kind, resolution, geometry.strip_width_mm, geometry.h_min, geometry.h_max, rng);
}

double height_margin(const Heightfield& field) { return 1e-4 * field.height_range(); }

void clamp_to_interior(Heightfield& field) {
  const double d = height_margin(field);
  for (double& h : field.heights) h = std::clamp(h, field.h_min + d, field.h_max - d);
  for (Rgb& c : field.colors) c = clamp01(c);
}

void adam_step(OptimizerState& state, const GradientSet& grads, Block which, const AdamConfig& cfg) {
  Heightfield& f = state.field;
  if (grads.d_heights.size() != f.size() || grads.d_colors.size() != f.size()) {
    throw InvalidArgument("adam_step: gradient shape does not match the field");
  }
  if (!grads.all_finite()) throw NumericError("adam_step: non-finite gradient");
  if (state.m_heights.size() != f.size()) state.reset_moments();
  const kernels::Table& kt = kernels::active();
  kernels::AdamArgs a;
  a.beta1 = cfg.beta1;
  a.beta2 = cfg.beta2;
  a.epsilon = cfg.epsilon;
  if (which == Block::heights) {
    ++state.t_heights;
    a.lr = cfg.lr_heights ? *cfg.lr_heights : 0.05 * f.height_range();
    a.bias1 = 1.0 - std::pow(cfg.beta1, state.t_heights);
    a.bias2 = 1.0 - std::pow(cfg.beta2, state.t_heights);
    a.lo = f.h_min + height_margin(f);
    a.hi = f.h_max - height_margin(f);
    kt.adam_update(a, f.heights.data(), grads.d_heights.data(), state.m_heights.data(),
                   state.v_heights.data(), f.size());
  } else {
    ++state.t_colors;
    a.lr = cfg.lr_colors;
    a.bias1 = 1.0 - std::pow(cfg.beta1, state.t_colors);
    a.bias2 = 1.0 - std::pow(cfg.beta2, state.t_colors);
    a.lo = 0.0;
    a.hi = 1.0;
    kt.adam_update(a, reinterpret_cast<double*>(f.colors.data()),
                   reinterpret_cast<const double*>(grads.d_colors.data()), state.m_colors.data(),
                   state.v_colors.data(), f.size() * 3);
  }
}

Heightfield subdivide_field(const Heightfield& field) {
  Heightfield out = field;
  out.rows = field.rows * 2;
  out.cols = field.cols * 2;
  out.strip_width = field.strip_width * 0.5;
  out.heights.assign(out.rows * static_cast<std::size_t>(out.cols), 0.0);
  out.colors.assign(out.heights.size(), Rgb{});
  for (int r = 0; r < out.rows; ++r) {
    for (int c = 0; c < out.cols; ++c) {
      out.heights[out.index(r, c)] = field.height(r / 2, c / 2);
      out.colors[out.index(r, c)] = field.color(r / 2, c / 2);
    }
  }
  return out;
}

namespace {

std::vector<double> replicate(const std::vector<double>& src, int rows, int cols, int per) {
  std::vector<double> out(src.size() * 4);
  const int out_cols = cols * 2;
  for (int r = 0; r < rows * 2; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      const std::size_t from = (static_cast<std::size_t>(r / 2) * cols + c / 2) * per;
      const std::size_t to = (static_cast<std::size_t>(r) * out_cols + c) * per;
      for (int k = 0; k < per; ++k) out[to + k] = src[from + k];
    }
  }
  return out;
}

}  // namespace

void subdivide(OptimizerState& state, int end_resolution) {
  const Heightfield& f = state.field;
  if (f.rows >= end_resolution || f.cols >= end_resolution) {
    throw InvalidArgument("subdivide: field already at the final resolution");
  }
  if (state.m_heights.size() != f.size()) state.reset_moments();
  state.m_heights = replicate(state.m_heights, f.rows, f.cols, 1);
  state.v_heights = replicate(state.v_heights, f.rows, f.cols, 1);
  state.m_colors = replicate(state.m_colors, f.rows, f.cols, 3);
  state.v_colors = replicate(state.v_colors, f.rows, f.cols, 3);
  state.field = subdivide_field(f);
}

bool metropolis_accept(double delta, double temperature, double u) {
  if (delta < 0.0) return true;
  return u < std::exp(-delta / temperature);
}

int annealing_iterations(const AnnealConfig& cfg) {
  int n = 0;
  for (double t = cfg.t_max; t > cfg.t_min; t *= cfg.cool_factor) ++n;
  return n;
}

Heightfield random_neighbour(const Heightfield& field, double temperature, const AnnealConfig& cfg,
                             Rng& rng) {
  Heightfield out = field;
  const double scale = temperature / cfg.t_max;
  const double sh = cfg.neighbor_sigma * field.height_range() * scale;
  const double sc = cfg.neighbor_sigma * scale;
  for (double& h : out.heights) h += sh * rng.normal();
  for (Rgb& c : out.colors) {
    c.r += sc * rng.normal();
    c.g += sc * rng.normal();
    c.b += sc * rng.normal();
  }
  clamp_to_interior(out);
  return out;
}

namespace {

double smooth_total(const Heightfield& field, std::span<const ViewSpec> views,
                    std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
                    const LossConfig& loss, const RenderSettings& settings) {
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
  parts.mse = mse_loss(rendered, desired, masks, loss.background_policy);
  if (loss.barrier_enabled) parts.barrier = barrier_loss(field);
  if (loss.neighbor_enabled) parts.neighbor = neighbor_loss(field, loss.neighbor_epsilon);
  return combine_loss(parts, loss, field.size());
}

double hard_loss(const Heightfield& field, std::span<const ViewSpec> views,
                 std::span<const ViewGeometry> geometry, const RenderSettings& settings) {
  std::vector<Image> rendered;
  std::vector<Image> desired;
  std::vector<std::vector<std::uint8_t>> masks;
  for (std::size_t v = 0; v < views.size(); ++v) {
    RenderOutput out = render_hard(field, geometry[v], settings);
    rendered.push_back(std::move(out.image));
    masks.push_back(std::move(out.miss_mask));
    desired.push_back(views[v].desired);
  }
  return mse_loss(rendered, desired, masks, BackgroundPolicy::mask);
}

std::vector<ViewGeometry> build_geometry(std::span<const ViewSpec> views, const Heightfield& field,
                                         const RenderSettings& settings) {
  std::vector<ViewGeometry> g;
  g.reserve(views.size());
  for (const ViewSpec& v : views) {
    g.push_back(ViewGeometry::build(v, FieldExtent::of(field, settings.tiling), settings.samples));
  }
  return g;
}

}  // namespace

int anneal(OptimizerState& state, std::span<const ViewSpec> views,
           std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
           const LossConfig& loss, const RenderSettings& settings, const AnnealConfig& cfg) {
  double current = smooth_total(state.field, views, geometry, spec, loss, settings);
  int accepted = 0;
  for (state.temperature = cfg.t_max; state.temperature > cfg.t_min; state.temperature *= cfg.cool_factor) {
    Heightfield candidate = random_neighbour(state.field, state.temperature, cfg, state.rng);
    const double next = smooth_total(candidate, views, geometry, spec, loss, settings);
    const double delta = next - current;
    // always draw so the stream position does not depend on the branch taken
    const double u = state.rng.uniform();
    if (metropolis_accept(delta, state.temperature, u)) {
      state.field = std::move(candidate);
      current = next;
      ++accepted;
    }
  }
  return accepted;
}

namespace {

void check_views(std::span<const ViewSpec> views) {
  if (views.empty()) throw InvalidArgument("optimize: at least one view required");
  const int m = views[0].image_size;
  for (const ViewSpec& v : views) {
    v.validate();
    if (v.image_size != m) throw InvalidArgument("optimize: all views must share image_size");
    if (v.desired.empty()) throw InvalidArgument("optimize: every view needs a desired image");
  }
}

}  // namespace

OptimizerState start_state(std::span<const ViewSpec> views, const OptimizerConfig& cfg) {
  (void)views;
  OptimizerState s;
  s.rng = Rng(cfg.seed);
  const int res = cfg.initial_resolution();
  s.field = initial_field(cfg.init_kind, res, cfg.strip_width_at(res), cfg.geometry.h_min,
                          cfg.geometry.h_max, s.rng);
  clamp_to_interior(s.field);
  s.reset_moments();
  s.temperature = cfg.annealing.t_max;
  s.next_subdivide_step = cfg.coarse_to_fine.subdivide_every;
  return s;
}

OptimizeResult optimize(std::span<const ViewSpec> views, const OptimizerConfig& cfg,
                        const OptimizeHooks& hooks, std::optional<OptimizerState> resume) {
  cfg.validate();
  check_views(views);
  OptimizerState state = resume ? std::move(*resume) : start_state(views, cfg);

  RenderSettings settings;
  settings.tiling = cfg.tiling;
  settings.background = cfg.background;
  std::vector<ViewGeometry> geometry = build_geometry(views, state.field, settings);

  HeavisideSpec spec;
  spec.kind = cfg.heaviside;
  spec.seed = cfg.seed;

  const int cycle = cfg.bcd.height_steps + cfg.bcd.color_steps;
  OptimizeResult result;

  auto consider_best = [&](double hard) {
    if (!state.has_best || hard < state.best_hard_mse) {
      state.best_hard_mse = hard;
      state.best_field = state.field;
      state.has_best = true;
    }
  };

  while (state.step < cfg.total_steps) {
    if (hooks.should_stop && hooks.should_stop()) {
      result.interrupted = true;
      break;
    }
    const int step = state.step;
    spec.k = cfg.k_at(step);
    settings.sample_counter = static_cast<std::uint64_t>(step);

    if (cfg.annealing.enabled && step % cfg.annealing.every_n_steps == 0) {
      anneal(state, views, geometry, spec, cfg.loss, settings, cfg.annealing);
    }

    if (cfg.bcd.enabled) {
      state.phase = (step % cycle) < cfg.bcd.height_steps ? Phase::heights : Phase::colors;
    } else {
      state.phase = Phase::both;
    }

    const BackwardResult br = backward(state.field, views, geometry, spec, cfg.loss, settings);
    const double hard = hard_loss(state.field, views, geometry, settings);
    consider_best(hard);

    StepRecord rec;
    rec.step = step;
    rec.mse = br.loss.mse;
    rec.barrier = br.loss.barrier;
    rec.neighbor = br.loss.neighbor;
    rec.total = br.loss.total;
    rec.phase = state.phase;
    rec.hard_mse = hard;
    rec.resolution = state.field.rows;
    rec.k = spec.k;
    rec.best = state.best_hard_mse;

    if (state.phase != Phase::colors) adam_step(state, br.grad, Block::heights, cfg.adam);
    if (state.phase != Phase::heights) adam_step(state, br.grad, Block::colors, cfg.adam);

    state.history.push_back(rec);
    state.step = step + 1;
    if (hooks.on_step) hooks.on_step(rec);

    const bool cycle_end = !cfg.bcd.enabled || state.step % cycle == 0;
    if (cfg.coarse_to_fine.enabled && cycle_end && state.step >= state.next_subdivide_step &&
        state.field.rows < cfg.coarse_to_fine.end_resolution) {
      subdivide(state, cfg.coarse_to_fine.end_resolution);
      geometry = build_geometry(views, state.field, settings);
      while (state.next_subdivide_step <= state.step) state.next_subdivide_step += cfg.coarse_to_fine.subdivide_every;
    }
  }

  if (!result.interrupted) consider_best(hard_loss(state.field, views, geometry, settings));

  Heightfield best = state.has_best ? state.best_field : state.field;
  while (best.rows < cfg.final_resolution()) best = subdivide_field(best);
  result.best_field = best;
  result.final_mse = hard_mse(best, views, settings);
  result.history = state.history;
  result.state = std::move(state);
  return result;
}

SegmentedColors project_colors(const Heightfield& field, std::span<const ViewSpec> views,
                               int segments_per_bar, const RenderSettings& settings) {
  SegmentedColors out = SegmentedColors::from_field(field, segments_per_bar);
  std::vector<Rgb> sum(out.bands.size());
  std::vector<double> count(out.bands.size(), 0.0);
  std::vector<HitRecord> hits;
  for (const ViewSpec& view : views) {
    if (view.desired.empty()) throw InvalidArgument("project_colors: view without a desired image");
    render_hard(field, view, settings, nullptr, &hits);
    for (const HitRecord& h : hits) {
      const int band = band_of(h, field.heights[h.cell], segments_per_bar);
      const std::size_t slot = h.cell * segments_per_bar + band;
      sum[slot] += view.desired[h.pixel];
      count[slot] += 1.0;
    }
  }
  for (std::size_t i = 0; i < out.bands.size(); ++i) {
    if (count[i] > 0.0) out.bands[i] = clamp01(sum[i] * (1.0 / count[i]));
  }
  return out;
}

}  // namespace hfa
