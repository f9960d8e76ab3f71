// Per-line and per-ray evaluation shared by the renderer and the reverse pass.
#pragma once

#include <cstdint>
#include <vector>

#include "hfa/geometry.hpp"
#include "hfa/heaviside.hpp"
#include "hfa/heightfield.hpp"
#include "hfa/render.hpp"

namespace hfa::detail {

struct LineState {
  std::size_t n = 0;
  std::vector<double> heights;
  std::vector<Rgb> colors;
  std::vector<double> y;    // n + 1 backtraced intercepts
  std::vector<double> yt;   // running max of y
  std::vector<int> arg;     // first argmax behind yt
  std::vector<std::size_t> changes;  // boundaries 1..n-1 where the strip color changes
  const std::vector<double>* widths = nullptr;
  const std::vector<std::size_t>* cells = nullptr;
};

void prepare_line(const Heightfield& field, const SliceGeometry& geometry, double slope,
                  LineState& line);

struct Scratch {
  std::vector<double> thr;
  std::vector<std::size_t> idx;
  std::vector<double> g;
  std::vector<double> dg;
};

std::uint64_t ray_key(std::uint64_t counter, int view, int pixel, int sample);

/// g and dg/dx at x_j = (o - thr[j]) * inv_scale. Stochastic kinds draw g from keys
/// mix(base_key, idx[j]) and report the derivative of the underlying probability.
void eval_steps(const HeavisideSpec& spec, double inv_scale, double o, const double* thr,
                const std::size_t* idx, std::size_t n, std::uint64_t base_key, double* g, double* dg);

/// Smooth pixel color with the open front. Only boundaries where the color changes and the
/// far end are evaluated, so splitting a strip into equal sub-strips leaves the result unchanged.
Rgb shade(const LineState& line, double o, const HeavisideSpec& spec, double inv_scale,
          const Rgb& background, std::uint64_t base_key, Scratch& scratch);

/// Boundary values g_i for i = 1..n (g[0] = 1 for the open front) and their derivatives.
void shade_all(const LineState& line, double o, const HeavisideSpec& spec, double inv_scale,
               std::uint64_t base_key, Scratch& scratch);

}  // namespace hfa::detail
