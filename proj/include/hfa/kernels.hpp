#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

namespace hfa::kernels {

enum class Isa { scalar, avx2 };

std::string to_string(Isa isa);

/// Bias-corrected Adam update with box projection, applied elementwise.
struct AdamArgs {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double bias1 = 1.0;  // 1 - beta1^t
  double bias2 = 1.0;  // 1 - beta2^t
  double lo = 0.0;
  double hi = 1.0;
};

/// Function table for one instruction set. Every entry has a scalar reference and, where
/// built, an AVX2 variant; tests check the two agree.
struct Table {
  Isa isa = Isa::scalar;

  // g[i] = 1/2 + 1/2 tanh(k x_i), x_i = (o - thr[i]) * inv_scale;
  // dg[i] = dg/dx at x_i (skipped when dg is null).
  void (*tanh_step)(double k, double inv_scale, double o, const double* thr, std::size_t n,
                    double* g, double* dg) = nullptr;

  // g[i] = 1/2 + 1/2 x_i / sqrt(x_i^2 + k^2)
  void (*circle_step)(double k, double inv_scale, double o, const double* thr, std::size_t n,
                      double* g, double* dg) = nullptr;

  void (*adam_update)(const AdamArgs& args, double* param, const double* grad, double* m,
                      double* v, std::size_t n) = nullptr;

  // sum_i keep[i] * (a[i] - b[i])^2 (keep may be null)
  double (*squared_error_sum)(const double* a, const double* b, const std::uint8_t* keep,
                              std::size_t n) = nullptr;
};

const Table& scalar_table();

/// nullptr when the AVX2 variants were not compiled in.
const Table* avx2_table();

bool cpu_has_avx2();

/// Table used by the renderer and optimizer: AVX2 when compiled in and supported by the CPU,
/// unless HFA_SIMD=scalar is set or an override is active.
const Table& active();
Isa active_isa();

/// Force an instruction set (tests, benchmarking). std::nullopt restores auto-detection.
void set_override(std::optional<Isa> isa);

}  // namespace hfa::kernels
