#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "vclust/types.hpp"

namespace vclust {

/// Disk of the given radius centered at the origin.
struct Disk {
  double radius = 1.0;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

using Domain = std::variant<Disk, Rect>;

bool contains_strict(const Domain& domain, const Vec2& x);
double distance_to_boundary(const Domain& domain, const Vec2& x);
/// Half-width of the smallest origin-anchored box enclosing the domain.
double domain_scale(const Domain& domain);
/// Lower-left and upper-right corners of the bounding box.
std::pair<Vec2, Vec2> bounding_box(const Domain& domain);

struct MatGrad {
  Mat2 d1 = Mat2::Zero();  // dK/dx1
  Mat2 d2 = Mat2::Zero();  // dK/dx2
};

using MatrixFn = std::function<Mat2(const Vec2&)>;
using MatGradFn = std::function<MatGrad(const Vec2&)>;
using ScalarFn = std::function<double(const Vec2&)>;
using VectorFn = std::function<Vec2(const Vec2&)>;

/// Data of the elliptic problem -div(K grad u) = f with the threshold q.
/// Immutable once built; all members are pure functions.
struct CoefficientField {
  std::string name;
  Domain domain;
  MatrixFn K;
  MatGradFn dK;
  ScalarFn q;
  VectorFn grad_q;
  double lambda_min = 1.0;  // ellipticity bounds
  double lambda_max = 1.0;
  bool constant_K = false;
  /// K(Rx) = R K(x) R^T and q(Rx) = q(x) for every rotation R about the origin.
  bool rotation_invariant = false;

  double det_K(const Vec2& x) const { return K(x).determinant(); }
  /// q^2 sqrt(det K), the quantity whose strict maxima host the clusters.
  double landscape_value(const Vec2& x) const {
    const double qv = q(x);
    return qv * qv * std::sqrt(det_K(x));
  }
};

struct HelicalParams {
  double k = 1.0;
  double alpha = -0.5;
  double beta = 2.0;
  double rstar = 1.0;

  /// min over the closed disk of alpha r^2/2 + beta (attained at r = 0 or r = R*).
  double min_q() const;
  void validate() const;
};

/// q(x) = peak - curvature |x - center|^2 together with its gradient.
struct QuadraticQ {
  double peak = 1.0;
  Vec2 center = Vec2::Zero();
  double curvature = 0.0;

  ScalarFn value() const;
  VectorFn gradient() const;
};

/// T = K^{-1/2}, the SPD matrix with T^{-1} T^{-t} = K.
/// Throws std::invalid_argument for non-symmetric or non-PD input.
Mat2 matrix_root(const Mat2& K);

CoefficientField identity_field(const Domain& domain, const QuadraticQ& q);
/// K = (1/b) Id with analytic grad b.
CoefficientField scalar_field(const Domain& domain, ScalarFn b, VectorFn grad_b, const QuadraticQ& q);
/// Default scalar test coefficient b(x) = 1 + |x|^2/4.
CoefficientField scalar_field_default(const Domain& domain, const QuadraticQ& q);
/// K = (1/b) Id where b is given by an expression in x1, x2 (see expr.hpp);
/// grad b by central differences.
CoefficientField scalar_field_expr(const Domain& domain, const std::string& b_expr, const QuadraticQ& q);
CoefficientField helical_field(const HelicalParams& params);
/// User-supplied K and q; dK and grad q by central differences with step 1e-6 * scale.
CoefficientField custom_field(const Domain& domain, MatrixFn K, ScalarFn q);

/// Helical coefficient matrix K_H(x) for pitch k.
Mat2 helical_matrix(double k, const Vec2& x);

/// Eigenvalue bounds of K sampled on an n x n lattice of the domain.
std::pair<double, double> sample_ellipticity(const Domain& domain, const MatrixFn& K, int n = 48);

struct Landscape {
  int nx = 0, ny = 0;
  Vec2 origin = Vec2::Zero();
  double dx = 0.0, dy = 0.0;
  std::vector<double> values;  // row-major (j * nx + i); NaN outside the domain
  Vec2 argmax = Vec2::Zero();
  double max_value = 0.0;

  Vec2 point(int i, int j) const { return origin + Vec2(i * dx, j * dy); }
};

/// Samples q^2 sqrt(det K) on a resolution x resolution lattice of the bounding box.
Landscape landscape(const CoefficientField& field, int resolution);

}  // namespace vclust
