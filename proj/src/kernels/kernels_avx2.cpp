// Compiled with -mavx2 -mfma -ffp-contract=off; only reached after a CPUID check.
#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "marsmc/kernels.hpp"

namespace marsmc::kernels {
namespace {

constexpr std::size_t kLanes = 4;

void sub_scaled_avx2(double* out, const double* in, double c, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d o = _mm256_loadu_pd(out + i);
    __m256d p = _mm256_mul_pd(vc, _mm256_loadu_pd(in + i));
    _mm256_storeu_pd(out + i, _mm256_sub_pd(o, p));
  }
  for (; i < len; ++i) out[i] -= c * in[i];
}

void scale_avx2(double* x, double c, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vc));
  }
  for (; i < len; ++i) x[i] *= c;
}

void add_squares_avx2(double* acc, const double* x, std::size_t len) {
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d v = _mm256_loadu_pd(x + i);
    __m256d a = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a, _mm256_mul_pd(v, v)));
  }
  for (; i < len; ++i) acc[i] += x[i] * x[i];
}

void dot_accumulate_avx2(double* acc, const double* x, double c, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + kLanes <= len; i += kLanes) {
    __m256d a = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_add_pd(a, _mm256_mul_pd(vc, _mm256_loadu_pd(x + i))));
  }
  for (; i < len; ++i) acc[i] += c * x[i];
}

// log(v) for finite v >= 1 (normal range). v = 2^e * m with m in [sqrt(1/2), sqrt(2));
// log m = 2 atanh(s), s = (m - 1) / (m + 1), |s| <= 0.1716, ten odd terms of the series.
inline __m256d log_ge1(__m256d v) {
  const __m256i bits = _mm256_castpd_si256(v);
  const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
  const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
  __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));

  // biased exponent -> double through the 2^52 trick
  const __m256i biased = _mm256_srli_epi64(bits, 52);
  const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
  __m256d e = _mm256_sub_pd(
      _mm256_castsi256_pd(_mm256_or_si256(biased, _mm256_castpd_si256(two52))), two52);
  e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

  const __m256d sqrt2 = _mm256_set1_pd(1.4142135623730950488);
  const __m256d big = _mm256_cmp_pd(m, sqrt2, _CMP_GE_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  e = _mm256_add_pd(e, _mm256_and_pd(big, _mm256_set1_pd(1.0)));

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  const __m256d s2 = _mm256_mul_pd(s, s);
  __m256d poly = _mm256_set1_pd(1.0 / 19.0);
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 17.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 15.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 13.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 11.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 9.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 7.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 5.0));
  poly = _mm256_add_pd(_mm256_mul_pd(poly, s2), _mm256_set1_pd(1.0 / 3.0));
  // 2s(1 + s2*poly) = 2s + 2s*s2*poly
  const __m256d two_s = _mm256_add_pd(s, s);
  const __m256d log_m = _mm256_add_pd(two_s, _mm256_mul_pd(_mm256_mul_pd(two_s, s2), poly));

  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  return _mm256_add_pd(_mm256_mul_pd(e, ln2_hi),
                       _mm256_add_pd(_mm256_mul_pd(e, ln2_lo), log_m));
}

double sum_log1p_scaled_avx2(const double* x, double c, std::size_t len) {
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d one = _mm256_set1_pd(1.0);
  // 1 + c*x rounds to 1 for tiny arguments; those lanes go through log1p below.
  const __m256d small = _mm256_set1_pd(1e-4);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  double tail = 0.0;
  for (; i + kLanes <= len; i += kLanes) {
    const __m256d z = _mm256_mul_pd(vc, _mm256_loadu_pd(x + i));
    const __m256d tiny = _mm256_cmp_pd(z, small, _CMP_LT_OQ);
    if (_mm256_movemask_pd(tiny) != 0) {
      alignas(32) double lanes[kLanes];
      _mm256_store_pd(lanes, z);
      for (double zl : lanes) tail += std::log1p(zl);
      continue;
    }
    acc = _mm256_add_pd(acc, log_ge1(_mm256_add_pd(one, z)));
  }
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, acc);
  double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < len; ++i) tail += std::log1p(c * x[i]);
  return sum + tail;
}

constexpr KernelTable kAvx2{
    "avx2",         sub_scaled_avx2,       scale_avx2, add_squares_avx2,
    dot_accumulate_avx2, sum_log1p_scaled_avx2,
};

}  // namespace

namespace detail {
const KernelTable* avx2_table_if_compiled() { return &kAvx2; }
}  // namespace detail

}  // namespace marsmc::kernels
