#pragma once

#include <cstddef>
#include <functional>

#include "vclust/types.hpp"

namespace vclust::kernels {

/// Compressed sparse rows (or columns of a symmetric matrix, which is the same thing).
struct CsrView {
  int rows = 0;
  const int* ptr = nullptr;
  const int* idx = nullptr;
  const double* val = nullptr;
};

// Reductions split the range into fixed-size blocks and add block sums in order,
// so results do not depend on the thread count.
inline constexpr std::size_t kReduceBlock = 4096;

namespace serial {
void spmv(const CsrView& a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
/// out = max(v - q, 0)^p
void plus_power(std::size_t n, const double* v, const double* q, double p, double* out);
/// out = p max(v - q, 0)^(p-1)
void plus_power_derivative(std::size_t n, const double* v, const double* q, double p, double* out);
void sample(std::size_t n, const std::function<double(const Vec2&)>& f, const Vec2* points, double* out);
double max_abs(std::size_t n, const double* x);
}  // namespace serial

namespace omp {
void spmv(const CsrView& a, const double* x, double* y);
double dot(std::size_t n, const double* x, const double* y);
void axpy(std::size_t n, double alpha, const double* x, double* y);
void plus_power(std::size_t n, const double* v, const double* q, double p, double* out);
void plus_power_derivative(std::size_t n, const double* v, const double* q, double p, double* out);
void sample(std::size_t n, const std::function<double(const Vec2&)>& f, const Vec2* points, double* out);
double max_abs(std::size_t n, const double* x);
}  // namespace omp

}  // namespace vclust::kernels
