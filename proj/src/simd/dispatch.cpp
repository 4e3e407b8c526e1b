#include <cassert>
#include <cstdlib>
#include <string_view>

#include "sentalign/simd.hpp"

namespace sentalign::simd {
namespace {

struct KernelTable {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  void (*rotate)(double*, double*, std::size_t, double, double) noexcept;
};

constexpr KernelTable kScalar{Backend::scalar, &scalar::dot, &scalar::axpy, &scalar::rotate};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{Backend::avx2, &avx2::dot, &avx2::axpy, &avx2::rotate};
#endif
#if defined(__aarch64__)
constexpr KernelTable kNeon{Backend::neon, &neon::dot, &neon::axpy, &neon::rotate};
#endif

const KernelTable* table_for(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return &kScalar;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      __builtin_cpu_init();
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
      return nullptr;
    case Backend::neon:
#if defined(__aarch64__)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("SENTALIGN_SIMD")) {
    const std::string_view want{env};
    if (want == "scalar") return &kScalar;
    if (want == "avx2" && table_for(Backend::avx2)) return table_for(Backend::avx2);
    if (want == "neon" && table_for(Backend::neon)) return table_for(Backend::neon);
  }
  for (Backend b : {Backend::avx2, Backend::neon}) {
    if (const KernelTable* t = table_for(b)) return t;
  }
  return &kScalar;
}

const KernelTable*& current() noexcept {
  static const KernelTable* table = detect();
  return table;
}

}  // namespace

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

Backend active_backend() noexcept { return current()->backend; }

bool backend_available(Backend b) noexcept { return table_for(b) != nullptr; }

bool set_backend(Backend b) noexcept {
  const KernelTable* t = table_for(b);
  if (t == nullptr) return false;
  current() = t;
  return true;
}

double dot(std::span<const double> x, std::span<const double> y) noexcept {
  assert(x.size() == y.size());
  return current()->dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  assert(x.size() == y.size());
  current()->axpy(alpha, x.data(), y.data(), x.size());
}

void rotate(std::span<double> x, std::span<double> y, double c, double s) noexcept {
  assert(x.size() == y.size());
  current()->rotate(x.data(), y.data(), x.size(), c, s);
}

}  // namespace sentalign::simd
