#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hfa {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad angle, bad shape, k <= 0, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Ray/slice geometry that cannot be evaluated (non-descending slope, empty slice).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf detected in a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration parse or validation failure. `problems` lists every violated constraint.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  double& operator[](std::size_t ch) { return ch == 0 ? r : (ch == 1 ? g : b); }
  double operator[](std::size_t ch) const { return ch == 0 ? r : (ch == 1 ? g : b); }

  friend Rgb operator+(Rgb a, const Rgb& o) { return {a.r + o.r, a.g + o.g, a.b + o.b}; }
  friend Rgb operator-(Rgb a, const Rgb& o) { return {a.r - o.r, a.g - o.g, a.b - o.b}; }
  friend Rgb operator*(Rgb a, double s) { return {a.r * s, a.g * s, a.b * s}; }
  friend Rgb operator*(double s, Rgb a) { return a * s; }
  Rgb& operator+=(const Rgb& o) {
    r += o.r;
    g += o.g;
    b += o.b;
    return *this;
  }
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

Rgb clamp01(Rgb c);

/// Square or rectangular RGB image with linear [0,1] channels, row-major.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return pixels_.empty(); }

  Rgb& at(int row, int col) { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  const Rgb& at(int row, int col) const { return pixels_[static_cast<std::size_t>(row) * width_ + col]; }
  Rgb& operator[](std::size_t i) { return pixels_[i]; }
  const Rgb& operator[](std::size_t i) const { return pixels_[i]; }
  std::size_t size() const { return pixels_.size(); }

  const std::vector<Rgb>& pixels() const { return pixels_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> pixels_;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

}  // namespace hfa
