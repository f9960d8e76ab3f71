#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hfa/heaviside.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/objective.hpp"
#include "hfa/render.hpp"

namespace hfa {

struct GradientSet {
  int rows = 0;
  int cols = 0;
  std::vector<double> d_heights;  // per millimeter
  std::vector<Rgb> d_colors;

  static GradientSet zeros(const Heightfield& field);
  bool all_finite() const;
};

/// 1D gradient of one slice line before it is scattered back onto the grid.
struct SliceGradient {
  int view = 0;
  int line = 0;
  std::vector<std::size_t> source_cells;
  std::vector<double> d_heights;
  std::vector<Rgb> d_colors;
};

struct BackwardResult {
  LossBreakdown loss;
  GradientSet grad;
  std::vector<Image> renders;  // smooth renders the loss was computed from
  std::vector<SliceGradient> slices;  // filled only when requested
};

struct BackwardOptions {
  bool keep_slice_gradients = false;
};

/// Loss and its gradient with respect to every height and color channel.
BackwardResult backward(const Heightfield& field, std::span<const ViewSpec> views,
                        const HeavisideSpec& spec, const LossConfig& cfg,
                        const RenderSettings& settings = {}, const BackwardOptions& options = {});

/// Variant reusing prebuilt view geometry (one entry per view, same settings.samples/tiling).
BackwardResult backward(const Heightfield& field, std::span<const ViewSpec> views,
                        std::span<const ViewGeometry> geometry, const HeavisideSpec& spec,
                        const LossConfig& cfg, const RenderSettings& settings,
                        const BackwardOptions& options = {});

struct GradProbe {
  std::string coordinate;  // "h[r,c]" or "c[r,c].ch"
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  bool high_curvature = false;
  bool crosses_tie = false;  // a cummax argmax changes between x - step and x + step
};

struct GradCheckReport {
  std::vector<GradProbe> probes;
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::string worst;
  int curvature_flags = 0;
  int tie_crossings = 0;          // probes excluded from max/mean: the loss has a kink in the stencil
  double max_rel_error_all = 0.0;  // including tie crossings

  void write_text(std::ostream& os) const;
  void write_csv(std::ostream& os) const;
};

struct GradCheckOptions {
  int probes = 100;
  double height_step = 1e-4;  // times h_max
  double color_step = 1e-4;
  double abs_floor = 1e-7;    // denominator floor of the relative error
  std::uint64_t seed = 0;
};

/// Central-difference check of the analytic total-loss gradient on randomly chosen
/// coordinates. Coordinates whose stencil would leave the feasible box are not sampled.
GradCheckReport grad_check(const Heightfield& field, std::span<const ViewSpec> views,
                           const HeavisideSpec& spec, const LossConfig& cfg,
                           const RenderSettings& settings, const GradCheckOptions& options);

}  // namespace hfa
