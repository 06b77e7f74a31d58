#include <arm_neon.h>

#include <cmath>
#include <vector>

#include "capa/simd.hpp"

namespace capa::simd {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline float64x2_t sin_neon(float64x2_t x) {
  const float64x2_t inv_pi = vdupq_n_f64(0.31830988618379067154);
  const float64x2_t pi_a = vdupq_n_f64(3.141592653589793116);
  const float64x2_t pi_b = vdupq_n_f64(1.2246467991473532072e-16);

  float64x2_t n = vrndnq_f64(vmulq_f64(x, inv_pi));
  float64x2_t r = vfmsq_f64(x, n, pi_a);
  r = vfmsq_f64(r, n, pi_b);
  uint64x2_t parity = vshlq_n_u64(vreinterpretq_u64_s64(vcvtq_s64_f64(n)), 63);

  const float64x2_t r2 = vmulq_f64(r, r);
  float64x2_t p = vdupq_n_f64(-3.868170170630684e-23);
  p = vfmaq_f64(vdupq_n_f64(1.9572941063391263e-20), p, r2);
  p = vfmaq_f64(vdupq_n_f64(-8.22063524662433e-18), p, r2);
  p = vfmaq_f64(vdupq_n_f64(2.8114572543455206e-15), p, r2);
  p = vfmaq_f64(vdupq_n_f64(-7.647163731819816e-13), p, r2);
  p = vfmaq_f64(vdupq_n_f64(1.6059043836821613e-10), p, r2);
  p = vfmaq_f64(vdupq_n_f64(-2.505210838544172e-08), p, r2);
  p = vfmaq_f64(vdupq_n_f64(2.7557319223985893e-06), p, r2);
  p = vfmaq_f64(vdupq_n_f64(-1.984126984126984e-04), p, r2);
  p = vfmaq_f64(vdupq_n_f64(8.333333333333333e-03), p, r2);
  p = vfmaq_f64(vdupq_n_f64(-1.6666666666666666e-01), p, r2);
  float64x2_t s = vfmaq_f64(r, vmulq_f64(p, r2), r);
  return vreinterpretq_f64_u64(veorq_u64(vreinterpretq_u64_f64(s), parity));
}

void sinc_row_neon(double k0, double zi, const double* z, double* out, std::size_t n) {
  const float64x2_t vk = vdupq_n_f64(k0);
  const float64x2_t vzi = vdupq_n_f64(zi);
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    float64x2_t x = vmulq_f64(vk, vsubq_f64(vzi, vld1q_f64(z + j)));
    uint64x2_t is_zero = vceqzq_f64(x);
    float64x2_t safe_x = vbslq_f64(is_zero, one, x);
    float64x2_t v = vdivq_f64(sin_neon(x), safe_x);
    vst1q_f64(out + j, vbslq_f64(is_zero, one, v));
  }
  for (; j < n; ++j) {
    const double x = k0 * (zi - z[j]);
    out[j] = (x == 0.0) ? 1.0 : std::sin(x) / x;
  }
}

void power_sums_neon(const double* r, std::size_t n, std::size_t kmax, double* out) {
  std::vector<double> lanes(kmax * 2, 0.0);
  std::size_t l = 0;
  for (; l + 2 <= n; l += 2) {
    const float64x2_t base = vld1q_f64(r + l);
    float64x2_t p = base;
    for (std::size_t k = 0; k < kmax; ++k) {
      double* slot = lanes.data() + 2 * k;
      vst1q_f64(slot, vaddq_f64(vld1q_f64(slot), p));
      p = vmulq_f64(p, base);
    }
  }
  for (std::size_t k = 0; k < kmax; ++k) out[k] = lanes[2 * k] + lanes[2 * k + 1];
  for (; l < n; ++l) {
    double p = r[l];
    for (std::size_t k = 0; k < kmax; ++k) {
      out[k] += p;
      p *= r[l];
    }
  }
}

const Kernels kNeon{Isa::neon, "neon", dot_neon, sinc_row_neon, power_sums_neon};

}  // namespace

const Kernels& neon_table() { return kNeon; }

}  // namespace capa::simd
