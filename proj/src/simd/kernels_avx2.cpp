// Built with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <cmath>
#include <vector>

#include "capa/simd.hpp"

namespace capa::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

// sin(x) with the argument reduced by multiples of pi (Cody-Waite, two-part
// pi with FMA) and an odd Taylor polynomial on [-pi/2, pi/2].
inline __m256d sin_avx2(__m256d x) {
  const __m256d inv_pi = _mm256_set1_pd(0.31830988618379067154);
  const __m256d pi_a = _mm256_set1_pd(3.141592653589793116);
  const __m256d pi_b = _mm256_set1_pd(1.2246467991473532072e-16);
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 2^52 + 2^51

  __m256d t = _mm256_add_pd(_mm256_mul_pd(x, inv_pi), magic);
  __m256d n = _mm256_sub_pd(t, magic);
  __m256d r = _mm256_fnmadd_pd(n, pi_a, x);
  r = _mm256_fnmadd_pd(n, pi_b, r);

  // odd multiples of pi flip the sign
  __m256i parity = _mm256_slli_epi64(_mm256_castpd_si256(t), 63);

  const __m256d r2 = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(-3.868170170630684e-23);  // -1/23!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(1.9572941063391263e-20));   // 1/21!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(-8.22063524662433e-18));    // -1/19!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(2.8114572543455206e-15));   // 1/17!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(-7.647163731819816e-13));   // -1/15!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(1.6059043836821613e-10));   // 1/13!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(-2.505210838544172e-08));   // -1/11!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(2.7557319223985893e-06));   // 1/9!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(-1.984126984126984e-04));   // -1/7!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(8.333333333333333e-03));    // 1/5!
  p = _mm256_fmadd_pd(p, r2, _mm256_set1_pd(-1.6666666666666666e-01));  // -1/3!
  __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(p, r2), r, r);
  return _mm256_xor_pd(s, _mm256_castsi256_pd(parity));
}

void sinc_row_avx2(double k0, double zi, const double* z, double* out, std::size_t n) {
  const __m256d vk = _mm256_set1_pd(k0);
  const __m256d vzi = _mm256_set1_pd(zi);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d x = _mm256_mul_pd(vk, _mm256_sub_pd(vzi, _mm256_loadu_pd(z + j)));
    __m256d is_zero = _mm256_cmp_pd(x, zero, _CMP_EQ_OQ);
    __m256d safe_x = _mm256_blendv_pd(x, one, is_zero);
    __m256d v = _mm256_div_pd(sin_avx2(x), safe_x);
    _mm256_storeu_pd(out + j, _mm256_blendv_pd(v, one, is_zero));
  }
  for (; j < n; ++j) {
    const double x = k0 * (zi - z[j]);
    out[j] = (x == 0.0) ? 1.0 : std::sin(x) / x;
  }
}

void power_sums_avx2(const double* r, std::size_t n, std::size_t kmax, double* out) {
  std::vector<double> lanes(kmax * 4, 0.0);
  std::size_t l = 0;
  for (; l + 4 <= n; l += 4) {
    const __m256d base = _mm256_loadu_pd(r + l);
    __m256d p = base;
    for (std::size_t k = 0; k < kmax; ++k) {
      double* slot = lanes.data() + 4 * k;
      _mm256_storeu_pd(slot, _mm256_add_pd(_mm256_loadu_pd(slot), p));
      p = _mm256_mul_pd(p, base);
    }
  }
  for (std::size_t k = 0; k < kmax; ++k)
    out[k] = hsum(_mm256_loadu_pd(lanes.data() + 4 * k));
  for (; l < n; ++l) {
    double p = r[l];
    for (std::size_t k = 0; k < kmax; ++k) {
      out[k] += p;
      p *= r[l];
    }
  }
}

const Kernels kAvx2{Isa::avx2, "avx2", dot_avx2, sinc_row_avx2, power_sums_avx2};

}  // namespace

const Kernels& avx2_table() { return kAvx2; }

}  // namespace capa::simd
