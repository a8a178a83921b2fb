#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/linalg_oracle.hpp"
#include "vclust/coeffs.hpp"
#include "vclust/expr.hpp"

using namespace vclust;

namespace {

double max_rel(const Mat2& a, const Mat2& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

double dk_fd_error(const CoefficientField& f, const Vec2& x, double h) {
  const MatGrad g = f.dK(x);
  const Mat2 fd1 = (f.K(x + Vec2(h, 0)) - f.K(x - Vec2(h, 0))) / (2 * h);
  const Mat2 fd2 = (f.K(x + Vec2(0, h)) - f.K(x - Vec2(0, h))) / (2 * h);
  return std::max((g.d1 - fd1).cwiseAbs().maxCoeff(), (g.d2 - fd2).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("matrix_root closed form") {
  CHECK(max_rel(matrix_root(Mat2::Identity()), Mat2::Identity()) < 1e-15);
  Mat2 d;
  d << 4, 0, 0, 1;
  Mat2 expect;
  expect << 0.5, 0, 0, 1;
  CHECK(max_rel(matrix_root(d), expect) < 1e-15);

  const Mat2 kh = helical_matrix(1.0, Vec2(0.6, 0.0));
  const Mat2 T = matrix_root(kh);
  CHECK(max_rel(T, oracle::inverse_sqrt(kh)) < 1e-13);
  CHECK(T(0, 1) == T(1, 0));
  CHECK(max_rel(T.inverse() * T.inverse().transpose(), kh) <= 1e-12);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int n = 0; n < 200; ++n) {
    Mat2 b;
    b << u(rng), u(rng), u(rng), u(rng);
    const Mat2 K = b * b.transpose() + 0.1 * Mat2::Identity();
    const Mat2 Tk = matrix_root(K);
    CHECK(max_rel(Tk, oracle::inverse_sqrt(K)) < 1e-11);
    const Mat2 Ti = Tk.inverse();
    CHECK(max_rel(Ti * Ti.transpose(), K) <= 1e-10);
  }
}

TEST_CASE("matrix_root rejects bad input") {
  Mat2 ns;
  ns << 1, 0.5, 0.2, 1;
  CHECK_THROWS_AS(matrix_root(ns), std::invalid_argument);
  Mat2 indef;
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(matrix_root(indef), std::invalid_argument);
  CHECK_THROWS_AS(matrix_root(-Mat2::Identity()), std::invalid_argument);
}

TEST_CASE("helical field") {
  HelicalParams hp;
  const auto f = helical_field(hp);
  CHECK(max_rel(f.K(Vec2::Zero()), Mat2::Identity()) == 0.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (double k : {0.5, 1.0, 2.0}) {
    for (int n = 0; n < 20; ++n) {
      const Vec2 x(u(rng), u(rng));
      CHECK(std::fabs(helical_matrix(k, x).determinant() - k * k / (k * k + x.squaredNorm())) <= 1e-12);
    }
  }
  double prev = f.landscape_value(Vec2::Zero());
  for (int i = 1; i <= 1000; ++i) {
    const double r = hp.rstar * i / 1000.0;
    const double v = f.landscape_value(Vec2(r, 0.0));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(f.lambda_min == doctest::Approx(0.5));
  auto [l1, l2] = sample_ellipticity(f.domain, f.K);
  CHECK(l1 >= f.lambda_min - 1e-12);
  CHECK(l2 <= 1.0 + 1e-12);

  HelicalParams bad;
  bad.alpha = -5.0;
  bad.beta = 2.0;
  CHECK_THROWS_AS(helical_field(bad), std::invalid_argument);
  bad.alpha = -0.5;
  bad.k = 0.0;
  CHECK_THROWS_AS(helical_field(bad), std::invalid_argument);
}

TEST_CASE("analytic dK matches central differences at second order") {
  QuadraticQ q{1.0, Vec2::Zero(), 0.0};
  std::vector<CoefficientField> fields = {helical_field({}), helical_field({0.4, -0.5, 2.0, 1.0}),
                                          scalar_field_default(Disk{1.0}, q), identity_field(Disk{1.0}, q)};
  for (const auto& f : fields) {
    for (const Vec2& x : {Vec2(0.3, -0.2), Vec2(-0.5, 0.4), Vec2(0.1, 0.6)}) {
      const double e1 = dk_fd_error(f, x, 1e-2), e2 = dk_fd_error(f, x, 5e-3);
      if (e1 < 1e-13) continue;  // exact for piecewise constant or quadratic entries
      CHECK(std::log2(e1 / e2) >= 1.9);
    }
  }
}

TEST_CASE("scalar field from expression") {
  QuadraticQ q{1.0, Vec2::Zero(), 0.0};
  const auto f = scalar_field_expr(Disk{1.0}, "1 + (x1^2 + x2^2)/4", q);
  const auto g = scalar_field_default(Disk{1.0}, q);
  for (const Vec2& x : {Vec2(0.3, -0.2), Vec2(-0.5, 0.4)}) {
    CHECK(max_rel(f.K(x), g.K(x)) < 1e-15);
    CHECK((f.dK(x).d1 - g.dK(x).d1).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((f.dK(x).d2 - g.dK(x).d2).cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK(Expression("2^3^2")(Vec2::Zero()) == doctest::Approx(512.0));
  CHECK(Expression("-x1^2")(Vec2(3, 0)) == doctest::Approx(-9.0));
  CHECK(Expression("exp(r2) + sin(pi/2)")(Vec2(1, 0)) == doctest::Approx(std::exp(1.0) + 1.0));
  CHECK_THROWS(Expression("1 + foo"));
  CHECK_THROWS(Expression("(1 + 2"));
}

TEST_CASE("custom field derivatives by central differences") {
  const auto f = custom_field(
      Disk{1.0}, [](const Vec2& x) -> Mat2 { return helical_matrix(1.0, x); },
      [](const Vec2& x) { return 2.0 - 0.25 * x.squaredNorm(); });
  const auto h = helical_field({});
  for (const Vec2& x : {Vec2(0.3, -0.2), Vec2(-0.5, 0.4)}) {
    CHECK((f.dK(x).d1 - h.dK(x).d1).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((f.grad_q(x) - h.grad_q(x)).norm() < 1e-8);
  }
}

TEST_CASE("landscape") {
  const auto flat = identity_field(Disk{1.0}, QuadraticQ{1.0, Vec2::Zero(), 0.0});
  const auto l = landscape(flat, 32);
  for (double v : l.values) {
    if (!std::isnan(v)) CHECK(v == 1.0);
  }
  const Vec2 x0(0.3, 0.0);
  const auto quad = identity_field(Disk{1.0}, QuadraticQ{2.0, x0, 1.0});
  const auto lq = landscape(quad, 64);
  CHECK(std::fabs(lq.argmax[0] - x0[0]) <= lq.dx);
  CHECK(std::fabs(lq.argmax[1] - x0[1]) <= lq.dy);
  const auto lh = landscape(helical_field({}), 65);
  CHECK(lh.argmax.norm() < 1e-12);
  CHECK_THROWS_AS(landscape(flat, 8), std::invalid_argument);
}
