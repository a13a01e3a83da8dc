#include "pblab/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace pblab::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out) {
  if (na == 0 || nb == 0) return;
  std::fill(out, out + na + nb - 1, 0.0);
  for (std::size_t i = 0; i < na; ++i) {
    const double ai = a[i];
    for (std::size_t j = 0; j < nb; ++j) out[i + j] += ai * b[j];
  }
}

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot(m + r * cols, x, cols);
}

void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y) {
  std::fill(y, y + cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double xr = x[r];
    const double* row = m + r * cols;
    for (std::size_t c = 0; c < cols; ++c) y[c] += xr * row[c];
  }
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double positive_part_mean(const double* w, std::size_t n, double level) {
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double gap = level - static_cast<double>(k);
    if (gap > 0.0) s += w[k] * gap;
  }
  return s;
}

}  // namespace scalar

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*convolve)(const double*, std::size_t, const double*, std::size_t, double*);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*vecmat)(const double*, const double*, std::size_t, std::size_t, double*);
  double (*l1_distance)(const double*, const double*, std::size_t);
  double (*positive_part_mean)(const double*, std::size_t, double);
};

constexpr Table kScalar{scalar::dot, scalar::convolve, scalar::matvec,
                        scalar::vecmat, scalar::l1_distance, scalar::positive_part_mean};
constexpr Table kAvx2{avx2::dot, avx2::convolve, avx2::matvec,
                      avx2::vecmat, avx2::l1_distance, avx2::positive_part_mean};

bool detect_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> t{detect_avx2() ? &kAvx2 : &kScalar};
  return t;
}

}  // namespace

bool avx2_supported() {
  static const bool ok = detect_avx2();
  return ok;
}

Backend active_backend() {
  return current().load() == &kAvx2 ? Backend::avx2 : Backend::scalar;
}

void force_backend(Backend b) {
  if (b == Backend::avx2 && !avx2_supported())
    throw std::runtime_error("avx2 backend requested but not supported by this CPU");
  current().store(b == Backend::avx2 ? &kAvx2 : &kScalar);
}

const char* backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return current().load()->dot(a, b, n); }

void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out) {
  current().load()->convolve(a, na, b, nb, out);
}

void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y) {
  current().load()->matvec(m, rows, cols, x, y);
}

void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y) {
  current().load()->vecmat(x, m, rows, cols, y);
}

double l1_distance(const double* a, const double* b, std::size_t n) {
  return current().load()->l1_distance(a, b, n);
}

double positive_part_mean(const double* w, std::size_t n, double level) {
  return current().load()->positive_part_mean(w, n, level);
}

}  // namespace pblab::kernels
