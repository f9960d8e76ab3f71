#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfa/common.hpp"
#include "hfa/heaviside.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/render.hpp"

namespace hfa {

enum class BackgroundPolicy { mask, penalize };

struct LossConfig {
  bool barrier_enabled = true;
  double barrier_weight = 1e-3;
  bool neighbor_enabled = true;
  double neighbor_weight = 1e-2;
  double neighbor_epsilon = 1e-6;
  BackgroundPolicy background_policy = BackgroundPolicy::mask;

  /// Table 1 columns.
  static LossConfig none();
  static LossConfig barrier_only();
  static LossConfig smoothing_only();
  static LossConfig both();

  double effective_barrier_weight() const { return barrier_enabled ? barrier_weight : 0.0; }
  double effective_neighbor_weight() const { return neighbor_enabled ? neighbor_weight : 0.0; }
  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct LossBreakdown {
  double mse = 0.0;
  double barrier = 0.0;   // raw sum over bars
  double neighbor = 0.0;  // raw sum over adjacent pairs
  double total = 0.0;
};

/// Mean over views, pixels and channels of the squared difference, normalized by m^2 |views|.
/// Under the mask policy pixels flagged in `miss_masks` contribute nothing.
double mse_loss(std::span<const Image> rendered, std::span<const Image> desired,
                std::span<const std::vector<std::uint8_t>> miss_masks = {},
                BackgroundPolicy policy = BackgroundPolicy::mask);

/// -sum[log(1 - u) + log(u)] with u = (h - h_min) / (h_max - h_min); +inf at or beyond a bound.
double barrier_loss(const Heightfield& field);
/// d barrier / d height (per millimeter).
std::vector<double> barrier_gradient(const Heightfield& field);

/// sum over 4-adjacent pairs of sqrt(du^2 + eps^2) - eps on normalized heights.
double neighbor_loss(const Heightfield& field, double epsilon = 1e-6);
std::vector<double> neighbor_gradient(const Heightfield& field, double epsilon = 1e-6);

/// mse + w_b barrier / N + w_n neighbor / N, N = bar count.
double combine_loss(const LossBreakdown& parts, const LossConfig& cfg, std::size_t bar_count);

/// Renders every view with the smooth renderer and evaluates the objective.
LossBreakdown total_loss(const Heightfield& field, std::span<const ViewSpec> views,
                         const HeavisideSpec& spec, const LossConfig& cfg,
                         const RenderSettings& settings = {});

/// Same objective with the exact step renderer (used to select and report final fields).
double hard_mse(const Heightfield& field, std::span<const ViewSpec> views,
                const RenderSettings& settings = {});

}  // namespace hfa
