#include "mmdcc/simd/ops.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace mmdcc::simd {

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("RKHS_CC_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2") return Backend::avx2;
    if (v == "neon") return Backend::neon;
    throw std::runtime_error("RKHS_CC_SIMD: unknown backend '" + v +
                             "' (expected scalar, avx2 or neon)");
  }
  if (available(Backend::avx2)) return Backend::avx2;
  if (available(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

}  // namespace

bool available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
      return detail::avx2_ops() != nullptr && cpu_has_avx2();
    case Backend::neon:
      return detail::neon_ops() != nullptr;
  }
  return false;
}

const Ops& ops(Backend b) {
  if (!available(b))
    throw std::runtime_error(std::string("simd backend unavailable: ") +
                             std::string(backend_name(b)));
  switch (b) {
    case Backend::avx2:
      return *detail::avx2_ops();
    case Backend::neon:
      return *detail::neon_ops();
    default:
      return *detail::scalar_ops();
  }
}

Backend active_backend() {
  static const Backend b = detect();
  return b;
}

const Ops& ops() { return ops(active_backend()); }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "?";
}

}  // namespace mmdcc::simd
