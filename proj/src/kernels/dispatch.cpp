#include <cstdlib>
#include <string>

#include "dapose/kernels/kernels.hpp"
#include "dapose/util/errors.hpp"

namespace dapose::kernels {
namespace {

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Ops& table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::Avx2:
      return avx2_ops();
#endif
#if defined(__aarch64__)
    case Backend::Neon:
      return neon_ops();
#endif
    default:
      return scalar_ops();
  }
}

Backend pick_default() {
  if (const char* env = std::getenv("DAPOSE_KERNELS")) {
    const std::string s(env);
    if (s == "scalar") return Backend::Scalar;
    if (s == "avx2" && backend_supported(Backend::Avx2)) return Backend::Avx2;
    if (s == "neon" && backend_supported(Backend::Neon)) return Backend::Neon;
    // "auto" or unsupported request falls through to detection.
  }
  if (backend_supported(Backend::Avx2)) return Backend::Avx2;
  if (backend_supported(Backend::Neon)) return Backend::Neon;
  return Backend::Scalar;
}

Backend& active_slot() {
  static Backend b = pick_default();
  return b;
}

}  // namespace

const Ops& ops() { return table_for(active_slot()); }

const Ops& ops_for(Backend b) {
  if (!backend_supported(b)) {
    throw util::ConfigError("kernel backend not available: " + backend_name(b));
  }
  return table_for(b);
}

Backend active_backend() { return active_slot(); }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "?";
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out{Backend::Scalar};
  if (backend_supported(Backend::Avx2)) out.push_back(Backend::Avx2);
  if (backend_supported(Backend::Neon)) out.push_back(Backend::Neon);
  return out;
}

void force_backend(Backend b) {
  if (!backend_supported(b)) {
    throw util::ConfigError("kernel backend not available: " + backend_name(b));
  }
  active_slot() = b;
}

}  // namespace dapose::kernels
