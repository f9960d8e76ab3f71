#pragma once

#include <cstddef>
#include <vector>

#include "hfa/common.hpp"

namespace hfa {

/// Grid of square-footprint bars. Bar (r, c) covers
/// x in [c*w, (c+1)*w], y in [r*w, (r+1)*w] and rises from z = 0 to its height.
struct Heightfield {
  int rows = 0;
  int cols = 0;
  double strip_width = 1.0;  // mm
  double h_min = 0.0;        // mm
  double h_max = 1.0;        // mm
  std::vector<double> heights;  // rows*cols, row-major
  std::vector<Rgb> colors;      // rows*cols, row-major, channels in [0,1]

  /// Every bar at `height` with color `color`.
  static Heightfield uniform(int rows, int cols, double strip_width, double h_min, double h_max,
                             double height, Rgb color);

  std::size_t size() const { return heights.size(); }
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * cols + col; }
  double height(int row, int col) const { return heights[index(row, col)]; }
  const Rgb& color(int row, int col) const { return colors[index(row, col)]; }

  double extent_x() const { return cols * strip_width; }
  double extent_y() const { return rows * strip_width; }
  double height_range() const { return h_max - h_min; }

  /// Throws InvalidArgument when a field invariant is violated.
  void validate() const;

  friend bool operator==(const Heightfield&, const Heightfield&) = default;
};

/// Unit vector pointing from the camera toward the surface:
/// d = -(cos e cos a, cos e sin a, sin e). Elevation in (0, 90], azimuth in [0, 360).
Vec3 direction_from_angles(double elevation_deg, double azimuth_deg);

/// Same closed form without the range checks (used for limits and tests).
Vec3 direction_from_angles_unchecked(double elevation_deg, double azimuth_deg);

/// Orthographic view and the m x m image it should show.
struct ViewSpec {
  double elevation_deg = 90.0;
  double azimuth_deg = 0.0;
  int image_size = 0;
  Image desired;

  Vec3 direction() const { return direction_from_angles(elevation_deg, azimuth_deg); }
  bool is_nadir() const { return elevation_deg >= 90.0; }
  void validate() const;
};

}  // namespace hfa
