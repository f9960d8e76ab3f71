#include <cstdlib>
#include <cstring>
#include <mutex>

#include "hfa/kernels.hpp"

namespace hfa::kernels {

#ifndef HFA_HAVE_AVX2
const Table* avx2_table() { return nullptr; }
#endif

namespace {
std::optional<Isa> g_override;
}

std::string to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

void set_override(std::optional<Isa> isa) { g_override = isa; }

const Table& active() {
  const Table* avx2 = avx2_table();
  const bool avx2_usable = avx2 != nullptr && cpu_has_avx2();
  if (g_override) {
    if (*g_override == Isa::avx2 && avx2_usable) return *avx2;
    return scalar_table();
  }
  static const bool env_scalar = [] {
    const char* v = std::getenv("HFA_SIMD");
    return v != nullptr && std::strcmp(v, "scalar") == 0;
  }();
  if (avx2_usable && !env_scalar) return *avx2;
  return scalar_table();
}

Isa active_isa() { return active().isa; }

}  // namespace hfa::kernels
