#include <cstdlib>
#include <string_view>

#include "capa/simd.hpp"

namespace capa::simd {

#if defined(__x86_64__) || defined(_M_X64)
const Kernels& avx2_table();
#define CAPA_HAVE_AVX2_TU 1
#endif
#if defined(__aarch64__)
const Kernels& neon_table();
#define CAPA_HAVE_NEON_TU 1
#endif

const Kernels* avx2_kernels() {
#ifdef CAPA_HAVE_AVX2_TU
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels* neon_kernels() {
#ifdef CAPA_HAVE_NEON_TU
  return &neon_table();  // mandatory on AArch64
#else
  return nullptr;
#endif
}

std::vector<const Kernels*> available() {
  std::vector<const Kernels*> out{&scalar_kernels()};
  if (auto* k = avx2_kernels()) out.push_back(k);
  if (auto* k = neon_kernels()) out.push_back(k);
  return out;
}

namespace {

const Kernels& pick() {
  const char* env = std::getenv("CAPA_SIMD");
  std::string_view want = env ? env : "";
  if (want == "scalar") return scalar_kernels();
  if (want == "avx2") return avx2_kernels() ? *avx2_kernels() : scalar_kernels();
  if (want == "neon") return neon_kernels() ? *neon_kernels() : scalar_kernels();
  if (auto* k = avx2_kernels()) return *k;
  if (auto* k = neon_kernels()) return *k;
  return scalar_kernels();
}

}  // namespace

const Kernels& active() {
  static const Kernels& k = pick();
  return k;
}

}  // namespace capa::simd
