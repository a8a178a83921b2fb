#include <algorithm>
#include <cmath>

#include "vclust/kernels.hpp"

namespace vclust::kernels::serial {

void spmv(const CsrView& a, const double* x, double* y) {
  for (int r = 0; r < a.rows; ++r) {
    double s = 0.0;
    for (int k = a.ptr[r]; k < a.ptr[r + 1]; ++k) s += a.val[k] * x[a.idx[k]];
    y[r] = s;
  }
}

double dot(std::size_t n, const double* x, const double* y) {
  double total = 0.0;
  for (std::size_t b = 0; b < n; b += kReduceBlock) {
    const std::size_t e = std::min(n, b + kReduceBlock);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += x[i] * y[i];
    total += s;
  }
  return total;
}

void axpy(std::size_t n, double alpha, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void plus_power(std::size_t n, const double* v, const double* q, double p, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - q[i];
    out[i] = d > 0.0 ? std::pow(d, p) : 0.0;
  }
}

void plus_power_derivative(std::size_t n, const double* v, const double* q, double p, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = v[i] - q[i];
    out[i] = d > 0.0 ? p * std::pow(d, p - 1.0) : 0.0;
  }
}

void sample(std::size_t n, const std::function<double(const Vec2&)>& f, const Vec2* points, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = f(points[i]);
}

double max_abs(std::size_t n, const double* x) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace vclust::kernels::serial
