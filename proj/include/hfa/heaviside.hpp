#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hfa {

/// Step-function surrogates. `step` is the exact Heaviside; circle_distance and log are
/// Bernoulli-sampled versions of circle and tanh respectively.
enum class HeavisideKind { step, circle, circle_distance, erfc, tanh, log };

struct HeavisideSpec {
  HeavisideKind kind = HeavisideKind::tanh;
  double k = 10.0;
  std::uint64_t seed = 0;  // stochastic kinds only

  bool stochastic() const {
    return kind == HeavisideKind::circle_distance || kind == HeavisideKind::log;
  }
  void validate() const;
};

std::string to_string(HeavisideKind kind);
HeavisideKind parse_heaviside_kind(std::string_view name);

/// Deterministic value of the approximation; for the stochastic kinds, the success
/// probability of the Bernoulli draw.
double heaviside_probability(double x, const HeavisideSpec& spec);

/// d/dx of heaviside_probability (0 for the exact step).
double heaviside_derivative(double x, const HeavisideSpec& spec);

/// lambda(x, k). Stochastic kinds return a {0,1} draw keyed by (spec.seed, draw_key).
double smooth_heaviside(double x, const HeavisideSpec& spec, std::uint64_t draw_key = 0);

/// Counter-based uniform in [0,1): same key, same value, independent of call order.
double uniform_from_key(std::uint64_t key);
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b);

}  // namespace hfa
