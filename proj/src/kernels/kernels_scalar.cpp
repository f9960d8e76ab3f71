#include <algorithm>
#include <cmath>

#include "hfa/kernels.hpp"

namespace hfa::kernels {
namespace {

void tanh_step_scalar(double k, double inv_scale, double o, const double* thr, std::size_t n,
                      double* g, double* dg) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (o - thr[i]) * inv_scale;
    const double t = std::tanh(k * x);
    g[i] = 0.5 + 0.5 * t;
    if (dg) dg[i] = 0.5 * k * (1.0 - t * t);
  }
}

void circle_step_scalar(double k, double inv_scale, double o, const double* thr, std::size_t n,
                        double* g, double* dg) {
  const double k2 = k * k;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (o - thr[i]) * inv_scale;
    const double s = x * x + k2;
    const double r = std::sqrt(s);
    g[i] = 0.5 + 0.5 * (x / r);
    if (dg) dg[i] = 0.5 * k2 / (s * r);
  }
}

void adam_update_scalar(const AdamArgs& a, double* p, const double* grad, double* m, double* v,
                        std::size_t n) {
  const double c1 = 1.0 - a.beta1;
  const double c2 = 1.0 - a.beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = grad[i];
    m[i] = a.beta1 * m[i] + c1 * gi;
    v[i] = a.beta2 * v[i] + c2 * (gi * gi);
    const double mh = m[i] / a.bias1;
    const double vh = v[i] / a.bias2;
    const double next = p[i] - a.lr * mh / (std::sqrt(vh) + a.epsilon);
    p[i] = std::min(std::max(next, a.lo), a.hi);
  }
}

double squared_error_sum_scalar(const double* a, const double* b, const std::uint8_t* keep,
                                std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep && !keep[i]) continue;
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

}  // namespace

const Table& scalar_table() {
  static const Table table{Isa::scalar, &tanh_step_scalar, &circle_step_scalar, &adam_update_scalar,
                           &squared_error_sum_scalar};
  return table;
}

}  // namespace hfa::kernels
