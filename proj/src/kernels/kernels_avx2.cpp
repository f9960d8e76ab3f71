// AVX2 variants of the hot loops. Compiled with -mavx2 only; selected at runtime.
#include <immintrin.h>

#include <algorithm>
#include <cstring>

#include "hfa/kernels.hpp"

namespace hfa::kernels {
namespace {

// exp(x) for x in [-40, 0]: n = round(x / ln2), r = x - n ln2, degree-13 Taylor on r.
inline __m256d exp_neg(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, ln2_hi));
  r = _mm256_sub_pd(r, _mm256_mul_pd(n, ln2_lo));

  static constexpr double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0,
                                 1.0 / 3628800.0,    1.0 / 362880.0,    1.0 / 40320.0,
                                 1.0 / 5040.0,       1.0 / 720.0,       1.0 / 120.0,
                                 1.0 / 24.0,         1.0 / 6.0,         0.5,
                                 1.0,                1.0};
  __m256d p = _mm256_set1_pd(c[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(c[i]));

  const __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
  n64 = _mm256_slli_epi64(n64, 52);
  return _mm256_mul_pd(p, _mm256_castsi256_pd(n64));
}

inline void tanh_block(__m256d k, __m256d inv_scale, __m256d o, __m256d thr, __m256d& g, __m256d& dg) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d x = _mm256_mul_pd(_mm256_sub_pd(o, thr), inv_scale);
  const __m256d y = _mm256_mul_pd(k, x);
  const __m256d sign = _mm256_and_pd(y, sign_mask);
  __m256d a = _mm256_andnot_pd(sign_mask, y);
  const __m256d saturated = _mm256_cmp_pd(a, _mm256_set1_pd(20.0), _CMP_GT_OQ);
  a = _mm256_min_pd(a, _mm256_set1_pd(20.0));
  const __m256d e = exp_neg(_mm256_mul_pd(_mm256_set1_pd(-2.0), a));
  __m256d t = _mm256_div_pd(_mm256_sub_pd(one, e), _mm256_add_pd(one, e));
  t = _mm256_blendv_pd(t, one, saturated);
  t = _mm256_or_pd(t, sign);
  g = _mm256_add_pd(half, _mm256_mul_pd(half, t));
  dg = _mm256_mul_pd(_mm256_mul_pd(half, k), _mm256_sub_pd(one, _mm256_mul_pd(t, t)));
}

inline void circle_block(__m256d k2, __m256d inv_scale, __m256d o, __m256d thr, __m256d& g, __m256d& dg) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d x = _mm256_mul_pd(_mm256_sub_pd(o, thr), inv_scale);
  const __m256d s = _mm256_add_pd(_mm256_mul_pd(x, x), k2);
  const __m256d r = _mm256_sqrt_pd(s);
  g = _mm256_add_pd(half, _mm256_mul_pd(half, _mm256_div_pd(x, r)));
  dg = _mm256_div_pd(_mm256_mul_pd(half, k2), _mm256_mul_pd(s, r));
}

template <class Block>
void step_driver(Block block, __m256d kk, double inv_scale, double o, const double* thr,
                 std::size_t n, double* g, double* dg) {
  const __m256d vs = _mm256_set1_pd(inv_scale);
  const __m256d vo = _mm256_set1_pd(o);
  std::size_t i = 0;
  __m256d vg, vdg;
  for (; i + 4 <= n; i += 4) {
    block(kk, vs, vo, _mm256_loadu_pd(thr + i), vg, vdg);
    _mm256_storeu_pd(g + i, vg);
    if (dg) _mm256_storeu_pd(dg + i, vdg);
  }
  if (i < n) {
    // Pad the tail so every element goes through the same vector arithmetic.
    alignas(32) double t[4] = {o, o, o, o};
    alignas(32) double og[4];
    alignas(32) double odg[4];
    std::memcpy(t, thr + i, (n - i) * sizeof(double));
    block(kk, vs, vo, _mm256_load_pd(t), vg, vdg);
    _mm256_store_pd(og, vg);
    _mm256_store_pd(odg, vdg);
    std::memcpy(g + i, og, (n - i) * sizeof(double));
    if (dg) std::memcpy(dg + i, odg, (n - i) * sizeof(double));
  }
}

void tanh_step_avx2(double k, double inv_scale, double o, const double* thr, std::size_t n,
                    double* g, double* dg) {
  step_driver(tanh_block, _mm256_set1_pd(k), inv_scale, o, thr, n, g, dg);
}

void circle_step_avx2(double k, double inv_scale, double o, const double* thr, std::size_t n,
                      double* g, double* dg) {
  step_driver(circle_block, _mm256_set1_pd(k * k), inv_scale, o, thr, n, g, dg);
}

void adam_update_avx2(const AdamArgs& a, double* p, const double* grad, double* m, double* v,
                      std::size_t n) {
  const __m256d b1 = _mm256_set1_pd(a.beta1);
  const __m256d b2 = _mm256_set1_pd(a.beta2);
  const __m256d c1 = _mm256_set1_pd(1.0 - a.beta1);
  const __m256d c2 = _mm256_set1_pd(1.0 - a.beta2);
  const __m256d bias1 = _mm256_set1_pd(a.bias1);
  const __m256d bias2 = _mm256_set1_pd(a.bias2);
  const __m256d lr = _mm256_set1_pd(a.lr);
  const __m256d eps = _mm256_set1_pd(a.epsilon);
  const __m256d lo = _mm256_set1_pd(a.lo);
  const __m256d hi = _mm256_set1_pd(a.hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(c1, gi));
    const __m256d vi =
        _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)), _mm256_mul_pd(c2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mh = _mm256_div_pd(mi, bias1);
    const __m256d vh = _mm256_div_pd(vi, bias2);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mh), _mm256_add_pd(_mm256_sqrt_pd(vh), eps));
    __m256d next = _mm256_sub_pd(_mm256_loadu_pd(p + i), step);
    // operand order matches std::max(next, lo) / std::min(., hi)
    next = _mm256_max_pd(lo, next);
    next = _mm256_min_pd(hi, next);
    _mm256_storeu_pd(p + i, next);
  }
  if (i < n) scalar_table().adam_update(a, p + i, grad + i, m + i, v + i, n - i);
}

double squared_error_sum_avx2(const double* a, const double* b, const std::uint8_t* keep,
                              std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    d = _mm256_mul_pd(d, d);
    if (keep) {
      std::int32_t word;
      std::memcpy(&word, keep + i, 4);
      const __m128i k8 = _mm_cvtsi32_si128(word);
      const __m256d kd = _mm256_cvtepi32_pd(_mm_cvtepu8_epi32(k8));
      const __m256d nz = _mm256_cmp_pd(kd, _mm256_setzero_pd(), _CMP_NEQ_OQ);
      d = _mm256_and_pd(d, nz);
    }
    acc = _mm256_add_pd(acc, d);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  return sum + scalar_table().squared_error_sum(a + i, b + i, keep ? keep + i : nullptr, n - i);
}

}  // namespace

const Table* avx2_table() {
  static const Table table{Isa::avx2, &tanh_step_avx2, &circle_step_avx2, &adam_update_avx2,
                           &squared_error_sum_avx2};
  return &table;
}

}  // namespace hfa::kernels
