#include "hfa/heaviside.hpp"

#include <cmath>
#include <numbers>

#include "hfa/common.hpp"

namespace hfa {

void HeavisideSpec::validate() const {
  if (kind != HeavisideKind::step && !(k > 0.0 && std::isfinite(k))) {
    throw InvalidArgument("Heaviside smoothing parameter k must be positive");
  }
}

std::string to_string(HeavisideKind kind) {
  switch (kind) {
    case HeavisideKind::step: return "step";
    case HeavisideKind::circle: return "circle";
    case HeavisideKind::circle_distance: return "circle_distance";
    case HeavisideKind::erfc: return "erfc";
    case HeavisideKind::tanh: return "tanh";
    case HeavisideKind::log: return "log";
  }
  return "unknown";
}

HeavisideKind parse_heaviside_kind(std::string_view name) {
  if (name == "step") return HeavisideKind::step;
  if (name == "circle") return HeavisideKind::circle;
  if (name == "circle_distance") return HeavisideKind::circle_distance;
  if (name == "erfc") return HeavisideKind::erfc;
  if (name == "tanh") return HeavisideKind::tanh;
  if (name == "log") return HeavisideKind::log;
  throw InvalidArgument("unknown Heaviside kind '" + std::string(name) + "'");
}

double heaviside_probability(double x, const HeavisideSpec& spec) {
  const double k = spec.k;
  switch (spec.kind) {
    case HeavisideKind::step:
      return x >= 0.0 ? 1.0 : 0.0;
    case HeavisideKind::circle:
    case HeavisideKind::circle_distance:
      return 0.5 + 0.5 * (x / std::sqrt(x * x + k * k));
    case HeavisideKind::erfc:
      return 0.5 * std::erfc(-k * x);
    case HeavisideKind::tanh:
    case HeavisideKind::log:
      return 0.5 + 0.5 * std::tanh(k * x);
  }
  return 0.0;
}

double heaviside_derivative(double x, const HeavisideSpec& spec) {
  const double k = spec.k;
  switch (spec.kind) {
    case HeavisideKind::step:
      return 0.0;
    case HeavisideKind::circle:
    case HeavisideKind::circle_distance: {
      const double s = x * x + k * k;
      return 0.5 * k * k / (s * std::sqrt(s));
    }
    case HeavisideKind::erfc:
      return k / std::sqrt(std::numbers::pi) * std::exp(-(k * x) * (k * x));
    case HeavisideKind::tanh:
    case HeavisideKind::log: {
      const double t = std::tanh(k * x);
      return 0.5 * k * (1.0 - t * t);
    }
  }
  return 0.0;
}

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined word
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform_from_key(std::uint64_t key) {
  const std::uint64_t z = mix_key(key, 0x5851f42d4c957f2dULL);
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double smooth_heaviside(double x, const HeavisideSpec& spec, std::uint64_t draw_key) {
  spec.validate();
  const double p = heaviside_probability(x, spec);
  if (!spec.stochastic()) return p;
  return uniform_from_key(mix_key(spec.seed, draw_key)) < p ? 1.0 : 0.0;
}

}  // namespace hfa
