#include <cmath>

#include "capa/simd.hpp"

namespace capa::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void sinc_row_scalar(double k0, double zi, const double* z, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    const double x = k0 * (zi - z[j]);
    out[j] = (x == 0.0) ? 1.0 : std::sin(x) / x;
  }
}

void power_sums_scalar(const double* r, std::size_t n, std::size_t kmax, double* out) {
  for (std::size_t k = 0; k < kmax; ++k) out[k] = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double p = r[l];
    for (std::size_t k = 0; k < kmax; ++k) {
      out[k] += p;
      p *= r[l];
    }
  }
}

const Kernels kScalar{Isa::scalar, "scalar", dot_scalar, sinc_row_scalar, power_sums_scalar};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace capa::simd
