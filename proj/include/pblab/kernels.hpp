#pragma once

#include <cstddef>

// Dense numeric loops shared by the exact-analysis modules. Every routine has
// a scalar reference version and an AVX2/FMA version; the public entry points
// dispatch to the best backend the CPU supports.
namespace pblab::kernels {

enum class Backend { scalar, avx2 };

bool avx2_supported();
Backend active_backend();
// Throws std::runtime_error when the requested backend is unavailable.
void force_backend(Backend b);
const char* backend_name(Backend b);

double dot(const double* a, const double* b, std::size_t n);
// out[k] = sum_i a[i] * b[k - i], out has na + nb - 1 slots.
void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out);
// y = M x with M row-major rows x cols.
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
// y = x^T M with M row-major rows x cols.
void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y);
double l1_distance(const double* a, const double* b, std::size_t n);
// sum_k w[k] * max(level - k, 0) for k in [0, n).
double positive_part_mean(const double* w, std::size_t n, double level);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y);
double l1_distance(const double* a, const double* b, std::size_t n);
double positive_part_mean(const double* w, std::size_t n, double level);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void convolve(const double* a, std::size_t na, const double* b, std::size_t nb, double* out);
void matvec(const double* m, std::size_t rows, std::size_t cols, const double* x, double* y);
void vecmat(const double* x, const double* m, std::size_t rows, std::size_t cols, double* y);
double l1_distance(const double* a, const double* b, std::size_t n);
double positive_part_mean(const double* w, std::size_t n, double level);
}  // namespace avx2

}  // namespace pblab::kernels
