#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hfa/gradients.hpp"
#include "hfa/heaviside.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/objective.hpp"
#include "hfa/render.hpp"

namespace hfa {

enum class InitKind { flat, vertical_wall, horizontal_wall, cross, random };
std::string to_string(InitKind kind);
InitKind parse_init_kind(std::string_view name);

enum class Phase { heights, colors, both };
std::string to_string(Phase phase);
Phase parse_phase(std::string_view name);

/// Physical footprint and height bounds. strip_width_mm is the bar width at the starting
/// resolution; finer resolutions split it so the footprint never changes.
struct FieldGeometry {
  double strip_width_mm = 1.0;
  double h_min = 0.0;
  double h_max = 4.0;
  friend bool operator==(const FieldGeometry&, const FieldGeometry&) = default;
};

struct AdamConfig {
  std::optional<double> lr_heights;  // mm per step; default 0.05 (h_max - h_min)
  double lr_colors = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct CoarseToFineConfig {
  bool enabled = true;
  int start_resolution = 8;
  int end_resolution = 32;
  int subdivide_every = 50;
  friend bool operator==(const CoarseToFineConfig&, const CoarseToFineConfig&) = default;
};

struct BcdConfig {
  bool enabled = true;
  int height_steps = 10;
  int color_steps = 20;
  friend bool operator==(const BcdConfig&, const BcdConfig&) = default;
};

struct AnnealConfig {
  bool enabled = true;
  double t_max = 3.0;
  double t_min = 0.5;
  double cool_factor = 0.99;
  int every_n_steps = 100;
  double neighbor_sigma = 0.1;
  friend bool operator==(const AnnealConfig&, const AnnealConfig&) = default;
};

struct OptimizerConfig {
  int total_steps = 100;
  AdamConfig adam;
  CoarseToFineConfig coarse_to_fine;
  BcdConfig bcd;
  AnnealConfig annealing;
  InitKind init_kind = InitKind::cross;
  HeavisideKind heaviside = HeavisideKind::tanh;
  double k_start = 10.0;  // Heaviside k follows k_start -> k_end linearly over the run
  double k_end = 100.0;
  LossConfig loss;
  FieldGeometry geometry;
  int tiling = 1;
  Rgb background{};
  std::uint64_t seed = 0;

  /// Every violated constraint, empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;
  int initial_resolution() const;
  int final_resolution() const { return coarse_to_fine.end_resolution; }
  /// Strip width of a field with `resolution` bars per side.
  double strip_width_at(int resolution) const;
  double k_at(int step) const;
  double lr_heights() const;
  friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Deterministic random stream whose whole state is a 64-bit engine (serializable as text).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  double uniform();  // [0, 1)
  double normal();   // Box-Muller, no cached second value
  std::string state() const;
  void set_state(const std::string& text);
  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

struct StepRecord {
  int step = 0;
  double mse = 0.0;
  double barrier = 0.0;
  double neighbor = 0.0;
  double total = 0.0;
  Phase phase = Phase::both;
  double hard_mse = 0.0;
  int resolution = 0;
  double k = 0.0;
  double best = 0.0;  // best hard MSE so far
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct OptimizerState {
  Heightfield field;
  std::vector<double> m_heights, v_heights;
  std::vector<double> m_colors, v_colors;  // 3 per bar
  int t_heights = 0;
  int t_colors = 0;
  int step = 0;
  Phase phase = Phase::heights;
  double temperature = 0.0;
  Rng rng;
  std::vector<StepRecord> history;
  Heightfield best_field;
  double best_hard_mse = 0.0;
  bool has_best = false;
  int next_subdivide_step = 0;

  void reset_moments();
  friend bool operator==(const OptimizerState&, const OptimizerState&) = default;
};

Heightfield initial_field(InitKind kind, int resolution, const FieldGeometry& geometry,
                          std::uint64_t seed);
/// Same, with an explicit strip width (used when coarse-to-fine starts at another resolution).
Heightfield initial_field(InitKind kind, int resolution, double strip_width, double h_min,
                          double h_max, Rng& rng);

/// Height projection margin: delta = 1e-4 (h_max - h_min).
double height_margin(const Heightfield& field);
void clamp_to_interior(Heightfield& field);

enum class Block { heights, colors };

/// Bias-corrected Adam on one parameter block, followed by projection onto the feasible box.
void adam_step(OptimizerState& state, const GradientSet& grads, Block which, const AdamConfig& cfg);

/// Doubles the resolution by 2x2 replication of bars and Adam moments.
void subdivide(OptimizerState& state, int end_resolution);
Heightfield subdivide_field(const Heightfield& field);

bool metropolis_accept(double delta, double temperature, double u);
/// Number of cooling iterations between T_max and T_min.
int annealing_iterations(const AnnealConfig& cfg);

/// Gaussian neighbor of `field` at temperature T (heights and colors), clamped to feasibility.
Heightfield random_neighbour(const Heightfield& field, double temperature, const AnnealConfig& cfg,
                             Rng& rng);

/// Simulated annealing on the smooth total loss. Returns the number of accepted moves.
int anneal(OptimizerState& state, std::span<const ViewSpec> views,
           std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
           const LossConfig& loss, const RenderSettings& settings, const AnnealConfig& cfg);

struct OptimizeHooks {
  std::function<void(const StepRecord&)> on_step;
  std::function<bool()> should_stop;
};

struct OptimizeResult {
  Heightfield best_field;  // at the final resolution
  double final_mse = 0.0;  // hard-render MSE of best_field
  std::vector<StepRecord> history;
  OptimizerState state;
  bool interrupted = false;
};

OptimizerState start_state(std::span<const ViewSpec> views, const OptimizerConfig& cfg);

/// Runs (or resumes) the design loop.
OptimizeResult optimize(std::span<const ViewSpec> views, const OptimizerConfig& cfg,
                        const OptimizeHooks& hooks = {}, std::optional<OptimizerState> resume = {});

/// Assigns desired-image colors to the vertical bands struck by each view's hard-render rays;
/// bands hit by several rays average their colors, unhit bands keep the bar color.
SegmentedColors project_colors(const Heightfield& field, std::span<const ViewSpec> views,
                               int segments_per_bar, const RenderSettings& settings = {});

}  // namespace hfa
