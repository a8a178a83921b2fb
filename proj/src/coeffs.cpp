#include "vclust/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "vclust/error.hpp"
#include "vclust/expr.hpp"

namespace vclust {

bool contains_strict(const Domain& domain, const Vec2& x) {
  if (const auto* d = std::get_if<Disk>(&domain)) return x.squaredNorm() < d->radius * d->radius;
  const auto& r = std::get<Rect>(domain);
  return x[0] > r.x0 && x[0] < r.x1 && x[1] > r.y0 && x[1] < r.y1;
}

double distance_to_boundary(const Domain& domain, const Vec2& x) {
  if (const auto* d = std::get_if<Disk>(&domain)) return d->radius - x.norm();
  const auto& r = std::get<Rect>(domain);
  return std::min({x[0] - r.x0, r.x1 - x[0], x[1] - r.y0, r.y1 - x[1]});
}

std::pair<Vec2, Vec2> bounding_box(const Domain& domain) {
  if (const auto* d = std::get_if<Disk>(&domain)) return {Vec2(-d->radius, -d->radius), Vec2(d->radius, d->radius)};
  const auto& r = std::get<Rect>(domain);
  return {Vec2(r.x0, r.y0), Vec2(r.x1, r.y1)};
}

double domain_scale(const Domain& domain) {
  auto [lo, hi] = bounding_box(domain);
  return std::max({std::fabs(lo[0]), std::fabs(lo[1]), std::fabs(hi[0]), std::fabs(hi[1]), 1e-300});
}

double HelicalParams::min_q() const {
  return std::min(beta, 0.5 * alpha * rstar * rstar + beta);
}

void HelicalParams::validate() const {
  if (!(k > 0.0)) throw std::invalid_argument("helical: pitch k must be > 0");
  if (!(rstar > 0.0)) throw std::invalid_argument("helical: rstar must be > 0");
  if (!(min_q() > 0.0)) {
    std::ostringstream os;
    os << "helical: q = alpha r^2/2 + beta must be positive on the disk (min " << min_q() << ")";
    throw std::invalid_argument(os.str());
  }
}

ScalarFn QuadraticQ::value() const {
  const double p = peak, c = curvature;
  const Vec2 z = center;
  return [p, c, z](const Vec2& x) { return p - c * (x - z).squaredNorm(); };
}

VectorFn QuadraticQ::gradient() const {
  const double c = curvature;
  const Vec2 z = center;
  return [c, z](const Vec2& x) -> Vec2 { return -2.0 * c * (x - z); };
}

Mat2 matrix_root(const Mat2& K) {
  const double scale = K.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale) || scale == 0.0) throw std::invalid_argument("matrix_root: zero or non-finite matrix");
  if (std::fabs(K(0, 1) - K(1, 0)) > 1e-12 * scale) throw std::invalid_argument("matrix_root: matrix is not symmetric");
  const double det = K(0, 0) * K(1, 1) - K(0, 1) * K(1, 0);
  const double tr = K(0, 0) + K(1, 1);
  if (!(det > 0.0) || !(tr > 0.0)) throw std::invalid_argument("matrix_root: matrix is not positive definite");
  // sqrt(K) = (K + sqrt(det) I) / sqrt(tr + 2 sqrt(det)) (Cayley-Hamilton), then invert in closed form.
  const double sd = std::sqrt(det);
  const double t = std::sqrt(tr + 2.0 * sd);
  const double off = 0.5 * (K(0, 1) + K(1, 0));
  const double a = (K(0, 0) + sd) / t, b = off / t, d = (K(1, 1) + sd) / t;
  const double rdet = a * d - b * b;  // equals sd
  Mat2 T;
  T << d / rdet, -b / rdet, -b / rdet, a / rdet;
  return T;
}

Mat2 helical_matrix(double k, const Vec2& x) {
  const double k2 = k * k;
  const double den = k2 + x.squaredNorm();
  Mat2 m;
  m << k2 + x[1] * x[1], -x[0] * x[1], -x[0] * x[1], k2 + x[0] * x[0];
  return m / den;
}

std::pair<double, double> sample_ellipticity(const Domain& domain, const MatrixFn& K, int n) {
  auto [lo, hi] = bounding_box(domain);
  double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      Vec2 x(lo[0] + (hi[0] - lo[0]) * i / n, lo[1] + (hi[1] - lo[1]) * j / n);
      if (!contains_strict(domain, x)) {
        // pull boundary samples slightly inward so the closed domain is covered
        if (distance_to_boundary(domain, x) < -1e-12) continue;
      }
      Eigen::SelfAdjointEigenSolver<Mat2> es(K(x), Eigen::EigenvaluesOnly);
      lmin = std::min(lmin, es.eigenvalues()[0]);
      lmax = std::max(lmax, es.eigenvalues()[1]);
    }
  }
  return {lmin, lmax};
}

namespace {

void check_q_positive(const CoefficientField& f) {
  auto [lo, hi] = bounding_box(f.domain);
  const int n = 48;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      Vec2 x(lo[0] + (hi[0] - lo[0]) * i / n, lo[1] + (hi[1] - lo[1]) * j / n);
      if (distance_to_boundary(f.domain, x) < -1e-12) continue;
      if (!(f.q(x) > 0.0)) {
        std::ostringstream os;
        os << f.name << ": q must be positive on the closed domain (q(" << x[0] << "," << x[1] << ") = " << f.q(x) << ")";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

void check_domain(const Domain& domain) {
  if (const auto* d = std::get_if<Disk>(&domain)) {
    if (!(d->radius > 0.0)) throw std::invalid_argument("domain: disk radius must be > 0");
  } else {
    const auto& r = std::get<Rect>(domain);
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw std::invalid_argument("domain: degenerate rectangle");
  }
}

MatGradFn central_dK(MatrixFn K, double step) {
  return [K = std::move(K), step](const Vec2& x) {
    MatGrad g;
    g.d1 = (K(x + Vec2(step, 0)) - K(x - Vec2(step, 0))) / (2 * step);
    g.d2 = (K(x + Vec2(0, step)) - K(x - Vec2(0, step))) / (2 * step);
    return g;
  };
}

VectorFn central_grad(ScalarFn f, double step) {
  return [f = std::move(f), step](const Vec2& x) -> Vec2 {
    return Vec2((f(x + Vec2(step, 0)) - f(x - Vec2(step, 0))) / (2 * step),
                (f(x + Vec2(0, step)) - f(x - Vec2(0, step))) / (2 * step));
  };
}

}  // namespace

CoefficientField identity_field(const Domain& domain, const QuadraticQ& q) {
  check_domain(domain);
  CoefficientField f;
  f.name = "identity";
  f.domain = domain;
  f.K = [](const Vec2&) -> Mat2 { return Mat2::Identity(); };
  f.dK = [](const Vec2&) { return MatGrad{}; };
  f.q = q.value();
  f.grad_q = q.gradient();
  f.constant_K = true;
  f.rotation_invariant = std::holds_alternative<Disk>(domain) && (q.curvature == 0.0 || q.center.isZero());
  check_q_positive(f);
  return f;
}

CoefficientField scalar_field(const Domain& domain, ScalarFn b, VectorFn grad_b, const QuadraticQ& q) {
  check_domain(domain);
  CoefficientField f;
  f.name = "scalar";
  f.domain = domain;
  f.K = [b](const Vec2& x) -> Mat2 { return Mat2::Identity() / b(x); };
  f.dK = [b, grad_b](const Vec2& x) {
    const double bv = b(x);
    const Vec2 g = grad_b(x);
    MatGrad d;
    d.d1 = Mat2::Identity() * (-g[0] / (bv * bv));
    d.d2 = Mat2::Identity() * (-g[1] / (bv * bv));
    return d;
  };
  f.q = q.value();
  f.grad_q = q.gradient();
  auto [l1, l2] = sample_ellipticity(domain, f.K);
  if (!(l1 > 0.0)) throw std::invalid_argument("scalar: b must be positive on the domain");
  f.lambda_min = l1;
  f.lambda_max = l2;
  check_q_positive(f);
  return f;
}

CoefficientField scalar_field_default(const Domain& domain, const QuadraticQ& q) {
  auto f = scalar_field(
      domain, [](const Vec2& x) { return 1.0 + 0.25 * x.squaredNorm(); },
      [](const Vec2& x) -> Vec2 { return 0.5 * x; }, q);
  f.rotation_invariant = std::holds_alternative<Disk>(domain) && (q.curvature == 0.0 || q.center.isZero());
  return f;
}

CoefficientField scalar_field_expr(const Domain& domain, const std::string& b_expr, const QuadraticQ& q) {
  Expression e(b_expr);
  ScalarFn b = [e](const Vec2& x) { return e(x); };
  auto f = scalar_field(domain, b, central_grad(b, 1e-6 * domain_scale(domain)), q);
  f.name = "scalar(" + b_expr + ")";
  return f;
}

CoefficientField helical_field(const HelicalParams& params) {
  params.validate();
  const double k = params.k, alpha = params.alpha, beta = params.beta;
  CoefficientField f;
  f.name = "helical";
  f.domain = Disk{params.rstar};
  f.K = [k](const Vec2& x) { return helical_matrix(k, x); };
  f.dK = [k](const Vec2& x) {
    const double k2 = k * k;
    const double den = k2 + x.squaredNorm();
    Mat2 n;
    n << k2 + x[1] * x[1], -x[0] * x[1], -x[0] * x[1], k2 + x[0] * x[0];
    Mat2 dn1, dn2;
    dn1 << 0.0, -x[1], -x[1], 2.0 * x[0];
    dn2 << 2.0 * x[1], -x[0], -x[0], 0.0;
    MatGrad g;
    g.d1 = dn1 / den - n * (2.0 * x[0] / (den * den));
    g.d2 = dn2 / den - n * (2.0 * x[1] / (den * den));
    return g;
  };
  f.q = [alpha, beta](const Vec2& x) { return 0.5 * alpha * x.squaredNorm() + beta; };
  f.grad_q = [alpha](const Vec2& x) -> Vec2 { return alpha * x; };
  f.lambda_min = k * k / (k * k + params.rstar * params.rstar);
  f.lambda_max = 1.0;
  f.rotation_invariant = true;
  return f;
}

CoefficientField custom_field(const Domain& domain, MatrixFn K, ScalarFn q) {
  check_domain(domain);
  const double step = 1e-6 * domain_scale(domain);
  CoefficientField f;
  f.name = "custom";
  f.domain = domain;
  f.K = K;
  f.dK = central_dK(K, step);
  f.q = q;
  f.grad_q = central_grad(q, step);
  auto [l1, l2] = sample_ellipticity(domain, K);
  if (!(l1 > 0.0)) throw std::invalid_argument("custom: K is not positive definite on the domain");
  f.lambda_min = l1;
  f.lambda_max = l2;
  check_q_positive(f);
  return f;
}

Landscape landscape(const CoefficientField& field, int resolution) {
  if (resolution < 16) throw std::invalid_argument("landscape: resolution must be >= 16 per axis");
  auto [lo, hi] = bounding_box(field.domain);
  Landscape out;
  out.nx = out.ny = resolution;
  out.dx = (hi[0] - lo[0]) / (resolution - 1);
  out.dy = (hi[1] - lo[1]) / (resolution - 1);
  out.origin = lo;
  out.values.assign(static_cast<size_t>(resolution) * resolution, std::numeric_limits<double>::quiet_NaN());
  out.max_value = -std::numeric_limits<double>::infinity();
  for (int j = 0; j < resolution; ++j) {
    for (int i = 0; i < resolution; ++i) {
      const Vec2 x = out.point(i, j);
      if (!contains_strict(field.domain, x)) continue;
      const double v = field.landscape_value(x);
      out.values[static_cast<size_t>(j) * resolution + i] = v;
      if (v > out.max_value) {
        out.max_value = v;
        out.argmax = x;
      }
    }
  }
  return out;
}

}  // namespace vclust
