#include <cstdlib>
#include <string>

#include "tradenet/error.hpp"
#include "tradenet/kernels.hpp"

namespace tradenet::kernels {

#if defined(TRADENET_HAVE_AVX2)
const Table& avx2_table_unchecked();
#endif
#if defined(TRADENET_HAVE_NEON)
const Table& neon_table_unchecked();
#endif

std::string_view name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const Table* avx2_table() {
#if defined(TRADENET_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const Table* neon_table() {
#if defined(TRADENET_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &neon_table_unchecked();
#else
  return nullptr;
#endif
}

namespace {

const Table& select() {
  const char* forced = std::getenv("TRADENET_ISA");
  if (forced != nullptr) {
    const std::string want(forced);
    if (want == "scalar") return scalar_table();
    if (want == "avx2" && avx2_table() != nullptr) return *avx2_table();
    if (want == "neon" && neon_table() != nullptr) return *neon_table();
    warn("TRADENET_ISA=" + want + " is not available; using best supported kernels");
  }
  if (const Table* t = avx2_table()) return *t;
  if (const Table* t = neon_table()) return *t;
  return scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& table = select();
  return table;
}

}  // namespace tradenet::kernels
