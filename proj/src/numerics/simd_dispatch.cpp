#include <cstdlib>
#include <cstring>

#include "ebeam/simd.hpp"

namespace ebeam::simd {

#ifdef EBEAM_HAVE_AVX2
const Kernels& avx2_table();
#endif

const Kernels* avx2_kernels() {
#ifdef EBEAM_HAVE_AVX2
  static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& kernels() {
  static const Kernels* chosen = [] {
    const char* env = std::getenv("EBEAM_SIMD");
    if (env && std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    const Kernels* k = avx2_kernels();
    return k ? k : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace ebeam::simd
