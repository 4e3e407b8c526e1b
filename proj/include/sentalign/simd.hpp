#pragma once

// Data-parallel inner loops used by the dense linear algebra.
//
// Every kernel has a scalar reference implementation plus optional AVX2+FMA
// (x86-64) and NEON (aarch64) variants. The variant is picked once at
// startup from the CPU feature flags; SENTALIGN_SIMD=scalar in the
// environment, or set_backend(), forces the reference path. Variants only
// differ in summation order, so results agree to rounding, not bitwise.

#include <cstddef>
#include <span>
#include <string_view>

namespace sentalign::simd {

enum class Backend { scalar, avx2, neon };

std::string_view backend_name(Backend b) noexcept;

/// Backend currently used by the dispatching entry points below.
Backend active_backend() noexcept;

/// True when `b` can run on this CPU.
bool backend_available(Backend b) noexcept;

/// Switches the dispatching entry points to `b`. Returns false (and leaves
/// the selection untouched) when `b` is not available. Not thread-safe with
/// respect to concurrent kernel calls; intended for test setup.
bool set_backend(Backend b) noexcept;

/// Sum of x[i] * y[i]. Spans must have equal length.
double dot(std::span<const double> x, std::span<const double> y) noexcept;

/// y += alpha * x.
void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept;

/// Plane rotation applied to a pair of vectors:
///   x' = c*x - s*y,  y' = s*x + c*y
void rotate(std::span<double> x, std::span<double> y, double c, double s) noexcept;

/// Explicit per-backend entry points, used by the equivalence tests.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void rotate(double* x, double* y, std::size_t n, double c, double s) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void rotate(double* x, double* y, std::size_t n, double c, double s) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* x, const double* y, std::size_t n) noexcept;
void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept;
void rotate(double* x, double* y, std::size_t n, double c, double s) noexcept;
}  // namespace neon
#endif

}  // namespace sentalign::simd
