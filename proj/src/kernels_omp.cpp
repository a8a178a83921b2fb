#include <omp.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "vclust/kernels.hpp"

namespace vclust::kernels::omp {

void spmv(const CsrView& a, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (int r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.ptr[r]; k < a.ptr[r + 1]; ++k) s += a.val[k] * x[a.idx[k]];
    y[r] = s;
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  const std::size_t nb = (n + kReduceBlock - 1) / kReduceBlock;
  std::vector<double> part(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReduceBlock;
    const std::size_t hi = std::min(n, lo + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += x[i] * y[i];
    part[b] = s;
  }
  double total = 0.0;
  for (double s : part) total += s;
  return total;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) y[i] += alpha * x[i];
}

void plus_power(std::size_t n, const double* v, const double* q, double p, double* out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double d = v[i] - q[i];
    out[i] = d > 0.0 ? std::pow(d, p) : 0.0;
  }
}

void plus_power_derivative(std::size_t n, const double* v, const double* q, double p, double* out) {
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const double d = v[i] - q[i];
    out[i] = d > 0.0 ? p * std::pow(d, p - 1.0) : 0.0;
  }
}

void sample(std::size_t n, const std::function<double(const Vec2&)>& f, const Vec2* points, double* out) {
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) out[i] = f(points[i]);
}

double max_abs(std::size_t n, const double* x) {
  double m = 0.0;
#pragma omp parallel for reduction(max : m) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace vclust::kernels::omp
