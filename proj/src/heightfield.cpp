#include "hfa/heightfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hfa {

ConfigError::ConfigError(std::vector<std::string> problems)
    : Error([&] {
        std::string joined;
        for (const auto& p : problems) {
          if (!joined.empty()) joined += "; ";
          joined += p;
        }
        return joined;
      }()),
      problems_(std::move(problems)) {}

Rgb clamp01(Rgb c) {
  c.r = std::clamp(c.r, 0.0, 1.0);
  c.g = std::clamp(c.g, 0.0, 1.0);
  c.b = std::clamp(c.b, 0.0, 1.0);
  return c;
}

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill) {}

Heightfield Heightfield::uniform(int rows, int cols, double strip_width, double h_min, double h_max,
                                 double height, Rgb color) {
  Heightfield f;
  f.rows = rows;
  f.cols = cols;
  f.strip_width = strip_width;
  f.h_min = h_min;
  f.h_max = h_max;
  const auto n = static_cast<std::size_t>(std::max(rows, 0)) * std::max(cols, 0);
  f.heights.assign(n, height);
  f.colors.assign(n, color);
  return f;
}

void Heightfield::validate() const {
  std::ostringstream err;
  if (rows < 1 || cols < 1) err << "field must have at least one row and column; ";
  if (!(strip_width > 0.0)) err << "strip_width must be positive; ";
  if (!(h_min >= 0.0 && h_min < h_max)) err << "height bounds must satisfy 0 <= h_min < h_max; ";
  const auto n = static_cast<std::size_t>(std::max(rows, 0)) * std::max(cols, 0);
  if (heights.size() != n || colors.size() != n) err << "heights/colors size does not match rows*cols; ";
  if (err.tellp() == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!(heights[i] >= h_min && heights[i] <= h_max)) {
        err << "height " << heights[i] << " at bar " << i << " outside [h_min, h_max]; ";
        break;
      }
      const Rgb& c = colors[i];
      if (!(c.r >= 0 && c.r <= 1 && c.g >= 0 && c.g <= 1 && c.b >= 0 && c.b <= 1)) {
        err << "color at bar " << i << " outside [0,1]; ";
        break;
      }
    }
  }
  if (err.tellp() != 0) throw InvalidArgument(err.str());
}

namespace {

// cos(90deg) and friends come out as ~6e-17; snap so axis-aligned views stay axis-aligned.
double snap(double v) {
  if (std::abs(v) < 1e-12) return 0.0;
  if (std::abs(v - 1.0) < 1e-15) return 1.0;
  if (std::abs(v + 1.0) < 1e-15) return -1.0;
  return v;
}

}  // namespace

Vec3 direction_from_angles_unchecked(double elevation_deg, double azimuth_deg) {
  const double e = elevation_deg * std::numbers::pi / 180.0;
  const double a = azimuth_deg * std::numbers::pi / 180.0;
  const double ce = snap(std::cos(e));
  const double se = snap(std::sin(e));
  const double ca = snap(std::cos(a));
  const double sa = snap(std::sin(a));
  return {-(ce * ca), -(ce * sa), -se};
}

Vec3 direction_from_angles(double elevation_deg, double azimuth_deg) {
  if (!(elevation_deg > 0.0 && elevation_deg <= 90.0)) {
    throw InvalidArgument("elevation must lie in (0, 90] degrees, got " + std::to_string(elevation_deg));
  }
  if (!(azimuth_deg >= 0.0 && azimuth_deg < 360.0)) {
    throw InvalidArgument("azimuth must lie in [0, 360) degrees, got " + std::to_string(azimuth_deg));
  }
  return direction_from_angles_unchecked(elevation_deg, azimuth_deg);
}

void ViewSpec::validate() const {
  (void)direction();
  if (image_size < 1) throw InvalidArgument("view image_size must be positive");
  if (!desired.empty() && (desired.width() != image_size || desired.height() != image_size)) {
    throw InvalidArgument("desired image must be image_size x image_size");
  }
}

}  // namespace hfa
