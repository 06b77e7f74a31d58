#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace capa::simd {

enum class Isa { scalar, avx2, neon };

// One table per instruction set. Every variant must agree with the scalar
// table up to floating-point reassociation (checked in tests).
struct Kernels {
  Isa isa;
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // out[j] = sin(k0 (zi - z[j])) / (k0 (zi - z[j])), exactly 1 at zero offset
  void (*sinc_row)(double k0, double zi, const double* z, double* out, std::size_t n);
  // out[k-1] = sum_l r[l]^k for k = 1..kmax
  void (*power_sums)(const double* r, std::size_t n, std::size_t kmax, double* out);
};

const Kernels& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks it.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// Best available table. CAPA_SIMD=scalar|avx2|neon forces a choice (falls
// back to scalar if the requested one is unavailable).
const Kernels& active();

std::vector<const Kernels*> available();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void sinc_row(double k0, double zi, const double* z, double* out, std::size_t n) {
  active().sinc_row(k0, zi, z, out, n);
}
inline void power_sums(const double* r, std::size_t n, std::size_t kmax, double* out) {
  active().power_sums(r, n, kmax, out);
}

}  // namespace capa::simd
