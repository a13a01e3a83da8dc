#include <stdexcept>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "pblab/kernels.hpp"

namespace k = pblab::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(g);
  return v;
}

double scale_of(const std::vector<double>& v) {
  double s = 1.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

TEST_CASE("scalar kernels on hand-checked inputs") {
  const double a[] = {1, 2, 3};
  const double b[] = {4, 5, 6};
  CHECK(k::scalar::dot(a, b, 3) == 32.0);
  double out[5];
  k::scalar::convolve(a, 3, b, 3, out);
  const double want[] = {4, 13, 28, 27, 18};
  for (int i = 0; i < 5; ++i) CHECK(out[i] == want[i]);
  const double m[] = {1, 2, 3, 4, 5, 6};  // 2 x 3
  double y2[2], y3[3];
  k::scalar::matvec(m, 2, 3, a, y2);
  CHECK(y2[0] == 14.0);
  CHECK(y2[1] == 32.0);
  const double x2[] = {1, -1};
  k::scalar::vecmat(x2, m, 2, 3, y3);
  CHECK(y3[0] == -3.0);
  CHECK(y3[2] == -3.0);
  CHECK(k::scalar::l1_distance(a, b, 3) == 9.0);
  const double w[] = {0.5, 0.25, 0.25};
  CHECK(k::scalar::positive_part_mean(w, 3, 2.0) == doctest::Approx(0.5 * 2 + 0.25 * 1));
  CHECK(k::scalar::dot(a, b, 0) == 0.0);
}

TEST_CASE("vector kernels agree with the scalar reference") {
  if (!k::avx2_supported()) {
    MESSAGE("AVX2/FMA not available on this CPU; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 g(12345);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 63u, 64u, 65u, 257u, 1000u}) {
    CAPTURE(n);
    const auto a = random_vec(n, g);
    const auto b = random_vec(n, g);
    const double tol = 1e-13 * scale_of(a) * scale_of(b);
    CHECK(std::abs(k::avx2::dot(a.data(), b.data(), n) - k::scalar::dot(a.data(), b.data(), n)) <= tol);
    CHECK(std::abs(k::avx2::l1_distance(a.data(), b.data(), n) - k::scalar::l1_distance(a.data(), b.data(), n)) <=
          tol);
    const double level = static_cast<double>(n) / 2.0 + 0.5;
    CHECK(std::abs(k::avx2::positive_part_mean(a.data(), n, level) -
                   k::scalar::positive_part_mean(a.data(), n, level)) <= tol * (level + 1));
    if (n == 0) continue;
    const auto c = random_vec(n / 2 + 1, g);
    std::vector<double> o1(n + c.size() - 1), o2(o1.size());
    k::avx2::convolve(a.data(), n, c.data(), c.size(), o1.data());
    k::scalar::convolve(a.data(), n, c.data(), c.size(), o2.data());
    for (std::size_t i = 0; i < o1.size(); ++i) CHECK(o1[i] == doctest::Approx(o2[i]).epsilon(1e-12).scale(1.0));
    const std::size_t rows = n % 13 + 1;
    const auto m = random_vec(rows * n, g);
    const auto xr = random_vec(rows, g);
    std::vector<double> y1(rows), y2(rows), z1(n), z2(n);
    k::avx2::matvec(m.data(), rows, n, a.data(), y1.data());
    k::scalar::matvec(m.data(), rows, n, a.data(), y2.data());
    for (std::size_t i = 0; i < rows; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12).scale(1.0));
    k::avx2::vecmat(xr.data(), m.data(), rows, n, z1.data());
    k::scalar::vecmat(xr.data(), m.data(), rows, n, z2.data());
    for (std::size_t i = 0; i < n; ++i) CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("backend selection") {
  const auto before = k::active_backend();
  k::force_backend(k::Backend::scalar);
  CHECK(k::active_backend() == k::Backend::scalar);
  if (k::avx2_supported()) {
    k::force_backend(k::Backend::avx2);
    CHECK(k::active_backend() == k::Backend::avx2);
  } else {
    CHECK_THROWS_AS(k::force_backend(k::Backend::avx2), std::runtime_error);
  }
  k::force_backend(before);
  CHECK(std::string(k::backend_name(k::Backend::scalar)) == "scalar");
}
