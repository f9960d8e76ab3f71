#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hfa/common.hpp"
#include "hfa/heightfield.hpp"

namespace hfa {

/// A camera ray inside its slice plane: z(x) = intercept + slope * x, where x is the
/// distance travelled along the slice from the footprint entry point.
struct Ray2D {
  double slope = -1.0;
  double intercept = 0.0;
};

/// Footprint that rays are traced against. With repeat > 1 the unit field is virtually
/// tiled repeat x repeat times and pixels cover the central unit only.
struct FieldExtent {
  int rows = 1;
  int cols = 1;
  double strip_width = 1.0;
  int repeat = 1;

  static FieldExtent of(const Heightfield& field, int repeat = 1);

  int total_rows() const { return rows * repeat; }
  int total_cols() const { return cols * repeat; }
  double total_x() const { return static_cast<double>(total_cols()) * strip_width; }
  double total_y() const { return static_cast<double>(total_rows()) * strip_width; }
  /// Unit-field cell index of a materialized cell.
  std::size_t source_cell(int row, int col) const;
};

/// The ground-plane projection of a family of parallel camera rays.
struct SliceLine {
  int id = 0;
  double offset = 0.0;  // signed perpendicular distance of the line from the origin
  Vec2 entry;           // footprint entry point (camera side)
  Vec2 direction;       // unit horizontal travel direction
  double length = 0.0;  // length of the line clipped to the footprint; 0 when it misses
};

/// 1D cross-section induced by one slice line: strips in ray-travel order.
struct SliceCrossSection {
  std::vector<double> heights;             // n
  std::vector<double> cum_widths;          // n + 1, starts at 0, strictly increasing
  std::vector<Rgb> colors;                 // n
  std::vector<std::size_t> source_cells;   // n, flat unit-field indices

  std::size_t size() const { return heights.size(); }
  bool empty() const { return heights.empty(); }
};

/// Slice geometry only (independent of heights and colors).
struct SliceGeometry {
  std::vector<double> cum_widths;
  std::vector<std::size_t> source_cells;
};

struct CameraRay {
  int line = -1;  // -1 for nadir views
  int pixel = 0;  // row * m + col
  int sample = 0;
  Vec2 ground;            // where the ray meets z = 0
  double slice_x = 0.0;   // distance of `ground` from the line's entry point
  Ray2D ray;
};

struct CameraRays {
  bool nadir = false;
  double tan_elevation = 0.0;
  int image_size = 0;
  int samples = 1;  // per axis
  std::vector<SliceLine> lines;
  std::vector<CameraRay> rays;          // grouped by line, in line order
  std::vector<std::size_t> line_begin;  // lines.size() + 1 offsets into rays
};

/// One ray per pixel center (or samples x samples stratified rays per pixel), grouped into
/// slice lines. Pixel (i, j) maps to ground point ((j+.5) X/m, (i+.5) Y/m) of the central unit.
CameraRays make_camera_rays(const ViewSpec& view, const FieldExtent& extent, int samples = 1);

/// Clip the line to the footprint and walk the grid cells it crosses.
SliceGeometry slice_geometry(const SliceLine& line, const FieldExtent& extent);

SliceCrossSection slice_heightfield(const Heightfield& field, const SliceLine& line,
                                    const FieldExtent& extent);

/// Boundary intercepts at x = 0 for a descending ray slope:
/// y_0 = h_0, y_i = h_{i-1} - slope * W_i  (line through the far top corner of strip i-1).
std::vector<double> backtrace_boundaries(const SliceCrossSection& slice, double ray_slope);
void backtrace_boundaries(std::span<const double> heights, std::span<const double> cum_widths,
                          double ray_slope, std::span<double> out);

/// Running maximum. `argmax`, when given, receives the first index attaining each running max.
std::vector<double> monotonic_cummax(std::span<const double> y);
void monotonic_cummax(std::span<const double> y, std::span<double> out, std::span<int> argmax);

/// Grid cell containing a ground point of the materialized footprint (clamped to the edge).
std::size_t cell_at(const FieldExtent& extent, Vec2 ground);

}  // namespace hfa
