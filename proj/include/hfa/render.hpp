#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hfa/common.hpp"
#include "hfa/geometry.hpp"
#include "hfa/heaviside.hpp"
#include "hfa/heightfield.hpp"

namespace hfa {

inline constexpr int kMiss = -1;

struct RenderSettings {
  Rgb background{};          // color of rays that leave the footprint without a hit
  int tiling = 1;            // odd repeat count; the unit is virtually tiled tiling x tiling
  int samples = 1;           // stratified rays per pixel axis
  std::uint64_t sample_counter = 0;  // decorrelates stochastic Heaviside draws between calls
};

struct RenderOutput {
  Image image;
  std::vector<int> hit_index;            // unit-field cell of the first sample's hit, or kMiss
  std::vector<std::uint8_t> miss_mask;   // 1 when every sample of the pixel missed

  int size() const { return image.width(); }
};

/// Options of a single-pixel evaluation.
struct PixelEvalOptions {
  double length_scale = 1.0;  // Heaviside argument is (o - Y) / length_scale
  Rgb background{};
  bool open_front = false;    // rays below Y_0 strike the entry strip's outer wall
  std::uint64_t sample_key = 0;
};

/// sum_i c_i (g(o - Y_i) - g(o - Y_{i+1})) + background (1 - g(o - Y_0) + g(o - Y_n)).
Rgb pixel_color_product(const SliceCrossSection& slice, std::span<const double> y_tilde,
                        const Ray2D& ray, const HeavisideSpec& spec, const PixelEvalOptions& opts = {});

/// The same quantity regrouped per boundary: c_0 g_0 + sum_i (c_i - c_{i-1}) g_i - c_{n-1} g_n + ...
Rgb pixel_color_telescoped(const SliceCrossSection& slice, std::span<const double> y_tilde,
                           const Ray2D& ray, const HeavisideSpec& spec,
                           const PixelEvalOptions& opts = {});

/// Per-bar vertical color bands: band s of a bar with height h covers z in [s h/S, (s+1) h/S].
/// The top face shows band S-1.
struct SegmentedColors {
  int segments = 1;
  std::vector<Rgb> bands;  // cell * segments + s

  static SegmentedColors from_field(const Heightfield& field, int segments);
  const Rgb& band(std::size_t cell, int s) const { return bands[cell * segments + s]; }
  Rgb& band(std::size_t cell, int s) { return bands[cell * segments + s]; }
  friend bool operator==(const SegmentedColors&, const SegmentedColors&) = default;
};

enum class HitFace { none, top, side };

struct HitRecord {
  int pixel = 0;
  int sample = 0;
  std::size_t cell = 0;
  HitFace face = HitFace::none;
  double z = 0.0;  // height of the hit point
};

/// Band index of a hit at height z on a bar of height h.
int band_of(const HitRecord& hit, double bar_height, int segments);

/// Rays and per-line slice geometry for one view at one field resolution. Depends only on
/// the footprint grid, not on heights or colors, so it can be reused across steps.
struct ViewGeometry {
  CameraRays rays;
  std::vector<SliceGeometry> slices;  // per slice line

  static ViewGeometry build(const ViewSpec& view, const FieldExtent& extent, int samples);
};

RenderOutput render_view(const Heightfield& field, const ViewSpec& view, const HeavisideSpec& spec,
                         const RenderSettings& settings = {});
RenderOutput render_view(const Heightfield& field, const ViewGeometry& geometry,
                         const HeavisideSpec& spec, const RenderSettings& settings, int view_index = 0);

RenderOutput render_hard(const Heightfield& field, const ViewSpec& view,
                         const RenderSettings& settings = {}, const SegmentedColors* segments = nullptr,
                         std::vector<HitRecord>* hits = nullptr);
RenderOutput render_hard(const Heightfield& field, const ViewGeometry& geometry,
                         const RenderSettings& settings, const SegmentedColors* segments = nullptr,
                         std::vector<HitRecord>* hits = nullptr);

}  // namespace hfa
