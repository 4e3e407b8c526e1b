#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sentalign/linalg.hpp"
#include "sentalign/simd.hpp"
#include "support.hpp"

using namespace sentalign;

namespace {

struct Kernels {
  simd::Backend backend;
  double (*dot)(const double*, const double*, std::size_t) noexcept;
  void (*axpy)(double, const double*, double*, std::size_t) noexcept;
  void (*rotate)(double*, double*, std::size_t, double, double) noexcept;
};

std::vector<Kernels> vector_backends() {
  std::vector<Kernels> out;
#if defined(__x86_64__) || defined(_M_X64)
  if (simd::backend_available(simd::Backend::avx2)) {
    out.push_back({simd::Backend::avx2, &simd::avx2::dot, &simd::avx2::axpy, &simd::avx2::rotate});
  }
#endif
#if defined(__aarch64__)
  out.push_back({simd::Backend::neon, &simd::neon::dot, &simd::neon::axpy, &simd::neon::rotate});
#endif
  return out;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

// Restores the dispatch selection on scope exit.
struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_available(simd::Backend::scalar));
  BackendGuard guard;
  CHECK(simd::set_backend(simd::Backend::scalar));
  CHECK(simd::active_backend() == simd::Backend::scalar);
  CHECK(simd::backend_name(simd::Backend::scalar) == "scalar");
}

TEST_CASE("scalar kernels match hand-computed values") {
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{4, -5, 6};
  CHECK(simd::scalar::dot(x.data(), y.data(), 3) == 12.0);

  std::vector<double> acc{1, 1, 1};
  simd::scalar::axpy(2.0, x.data(), acc.data(), 3);
  CHECK(acc == std::vector<double>{3, 5, 7});

  std::vector<double> a{1, 0};
  std::vector<double> b{0, 1};
  simd::scalar::rotate(a.data(), b.data(), 2, 0.0, 1.0);
  CHECK(a == std::vector<double>{0, -1});
  CHECK(b == std::vector<double>{1, 0});
}

TEST_CASE("vector kernels agree with the scalar reference on every length") {
  const auto backends = vector_backends();
  if (backends.empty()) {
    MESSAGE("no vector backend on this CPU; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(2024);
  for (const Kernels& k : backends) {
    CAPTURE(simd::backend_name(k.backend));
    for (std::size_t n = 0; n <= 67; ++n) {
      CAPTURE(n);
      const auto x = random_vector(n, rng);
      const auto y = random_vector(n, rng);
      double mag = 0.0;
      for (std::size_t i = 0; i < n; ++i) mag += std::abs(x[i] * y[i]);
      const double ref = simd::scalar::dot(x.data(), y.data(), n);
      CHECK(std::abs(k.dot(x.data(), y.data(), n) - ref) <= 1e-14 * (1.0 + mag));

      auto y_ref = y;
      auto y_vec = y;
      simd::scalar::axpy(0.75, x.data(), y_ref.data(), n);
      k.axpy(0.75, x.data(), y_vec.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(y_vec[i] == doctest::Approx(y_ref[i]).epsilon(1e-15));

      auto xr = x, yr = y, xv = x, yv = y;
      const double c = std::cos(0.3), s = std::sin(0.3);
      simd::scalar::rotate(xr.data(), yr.data(), n, c, s);
      k.rotate(xv.data(), yv.data(), n, c, s);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(xv[i] - xr[i]) <= 1e-15 * 4);
        CHECK(std::abs(yv[i] - yr[i]) <= 1e-15 * 4);
      }
    }
  }
}

TEST_CASE("decompositions agree across backends") {
  const auto backends = vector_backends();
  if (backends.empty()) return;
  BackendGuard guard;
  const Matrix a = testing::random_matrix(40, 12, 99);
  const Matrix b = testing::random_matrix(40, 5, 100);

  REQUIRE(simd::set_backend(simd::Backend::scalar));
  const SvdResult ref = svd(a);
  const Matrix x_ref = pinv_solve(a, b);
  const Matrix g_ref = gram_solve(a, b);

  for (const Kernels& k : backends) {
    CAPTURE(simd::backend_name(k.backend));
    REQUIRE(simd::set_backend(k.backend));
    const SvdResult got = svd(a);
    for (std::size_t i = 0; i < ref.sigma.size(); ++i) {
      CHECK(got.sigma[i] == doctest::Approx(ref.sigma[i]).epsilon(1e-12));
    }
    CHECK(testing::naive_max_abs_diff(pinv_solve(a, b), x_ref) <= 1e-11);
    CHECK(testing::naive_max_abs_diff(gram_solve(a, b), g_ref) <= 1e-11);
  }
}

TEST_CASE("dispatch is deterministic for a fixed backend") {
  const Matrix a = testing::random_matrix(30, 7, 5);
  const SvdResult first = svd(a);
  const SvdResult second = svd(a);
  CHECK(first.sigma == second.sigma);
  CHECK(first.u == second.u);
  CHECK(first.vt == second.vt);
}
