#include "vclust/greens.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vclust/error.hpp"

namespace vclust {

namespace {

struct Local {
  Mat2 T, Tinv;
  double sdet;
  MatGrad dK;
};

Local local_data(const CoefficientField& field, const Vec2& y) {
  Local l;
  const Mat2 K = field.K(y);
  l.T = matrix_root(K);
  l.Tinv = l.T.inverse();
  l.sdet = std::sqrt(K.determinant());
  l.dK = field.dK(y);
  return l;
}

const Mat2& dk(const MatGrad& g, int alpha) { return alpha == 0 ? g.d1 : g.d2; }

// c[b][m][n] = sum_{alpha,i,j} d_alpha K_ij T^{-1}_{alpha b} T_{mj} T_{ni}
void contraction(const Local& l, double c[2][2][2]) {
  for (int b = 0; b < 2; ++b)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) {
        double s = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) s += dk(l.dK, a)(i, j) * l.Tinv(a, b) * l.T(m, j) * l.T(n, i);
        c[b][m][n] = s;
      }
}

}  // namespace

double singular_part(const CoefficientField& field, const Vec2& y, const Vec2& x) {
  if (x == y) throw std::invalid_argument("singular_part: x coincides with y");
  const Mat2 K = field.K(y);
  const Vec2 z = matrix_root(K) * (x - y);
  return fundamental(z.norm()) / std::sqrt(K.determinant());
}

double f1_correction(const CoefficientField& field, const Vec2& y, const Vec2& x) {
  if (x == y) return 0.0;
  const Local l = local_data(field, y);
  const Vec2 z = l.T * (x - y);
  const double L = std::log(z.norm());
  double s = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double dkij = dk(l.dK, i)(i, j);
      for (int m = 0; m < 2; ++m) s += l.T(m, j) * dkij * z[m];
    }
  return -s * L / (4.0 * kPi * l.sdet);
}

double f2_correction(const CoefficientField& field, const Vec2& y, const Vec2& x, F2Form form) {
  if (x == y) return 0.0;
  const Local l = local_data(field, y);
  const Vec2 z = l.T * (x - y);
  const double r2 = z.squaredNorm();
  const double L = 0.5 * std::log(r2);
  double c[2][2][2];
  contraction(l, c);
  // log coefficients of the bracket (b, m, n); the rational part is -z_b z_m z_n / (8 |z|^2) throughout
  double lg[2][2][2];
  const double e = 1.0 / 8.0;
  lg[0][0][0] = e * z[0];
  lg[0][0][1] = e * z[1];
  lg[0][1][0] = e * z[1];
  lg[0][1][1] = -e * z[0];
  lg[1][0][0] = -e * z[1];
  lg[1][0][1] = e * z[0];
  lg[1][1][0] = e * z[0];
  lg[1][1][1] = e * z[1];
  double extra = 0.0;
  if (form == F2Form::Proof) {
    lg[0][0][0] = 3 * e * z[0];
    lg[0][1][1] = e * z[0];
    lg[1][0][0] = e * z[1];
    lg[1][1][1] = 3 * e * z[1];
    for (int b = 0; b < 2; ++b)
      for (int m = 0; m < 2; ++m) extra += c[b][m][m] * 0.5 * z[b] * L;
    extra *= -1.0 / (2.0 * kPi * l.sdet);
  }
  double s = 0.0;
  for (int b = 0; b < 2; ++b)
    for (int m = 0; m < 2; ++m)
      for (int n = 0; n < 2; ++n) s += c[b][m][n] * (-e * z[b] * z[m] * z[n] / r2 + lg[b][m][n] * L);
  return extra + s / (kPi * l.sdet);
}

double oracle_disk_regular(const Vec2& x, const Vec2& y, double radius) {
  const double ny = y.norm();
  if (ny == 0.0) return std::log(radius) / (2.0 * kPi);
  const Vec2 w = (ny / radius) * x - (radius / ny) * y;
  return std::log(w.norm()) / (2.0 * kPi);
}

double oracle_disk_green(const Vec2& x, const Vec2& y, double radius) {
  if (x == y) throw std::invalid_argument("oracle_disk_green: coincident points");
  return fundamental((x - y).norm()) + oracle_disk_regular(x, y, radius);
}

double GreenTable::regular_at(const Vec2& x) const { return interpolate(*grid, Sbar, x, 0.0); }

double GreenTable::green_at(const CoefficientField& field, const Vec2& x) const {
  if (x == y) throw std::invalid_argument("green_at: coincident points");
  // regular part vanishes-by-construction only through G; near the boundary use G directly
  const Vec2 f = grid->lattice_coords(x);
  const int i = static_cast<int>(std::floor(f[0])), j = static_cast<int>(std::floor(f[1]));
  bool inner = true;
  for (int dj = 0; dj < 2; ++dj)
    for (int di = 0; di < 2; ++di) {
      const int n = grid->node(std::clamp(i + di, 0, grid->nx - 1), std::clamp(j + dj, 0, grid->ny - 1));
      if (grid->unknown[n] < 0 || std::isnan(Sbar[grid->unknown[n]])) inner = false;
    }
  if (!inner) return interpolate(*grid, G, x, 0.0);
  return singular_part(field, y, x) + regular_at(x);
}

namespace {

void check_source(const Grid2D& grid, const Vec2& y, double clearance, const char* who) {
  if (!contains_strict(grid.domain, y)) {
    std::ostringstream os;
    os << who << ": source (" << y[0] << ", " << y[1] << ") outside the domain";
    throw std::invalid_argument(os.str());
  }
  if (distance_to_boundary(grid.domain, y) < clearance) {
    std::ostringstream os;
    os << who << ": source (" << y[0] << ", " << y[1] << ") closer than " << clearance << " to the boundary";
    throw std::invalid_argument(os.str());
  }
}

Vector spike(const Grid2D& grid, const Vec2& y) {
  Vector b = Vector::Zero(grid.size());
  const Vec2 f = grid.lattice_coords(y);
  const int i = static_cast<int>(std::floor(f[0])), j = static_cast<int>(std::floor(f[1]));
  const double tx = f[0] - i, ty = f[1] - j;
  const double w[4] = {(1 - tx) * (1 - ty), tx * (1 - ty), (1 - tx) * ty, tx * ty};
  for (int k = 0; k < 4; ++k) {
    if (w[k] == 0.0) continue;
    const int u = grid.unknown[grid.node(i + (k & 1), j + (k >> 1))];
    if (u < 0) throw std::invalid_argument("green_column: source cell touches the boundary");
    b[u] += w[k] / (grid.h * grid.h);
  }
  return b;
}

GreenTable finish_column(const DiscreteOperator& op, const CoefficientField& field, const Vec2& y, Vector G) {
  GreenTable t;
  t.grid = op.grid;
  t.y = y;
  t.G = std::move(G);
  t.r_excl = 3.0 * op.grid->h;
  t.Sbar.resize(t.G.size());
  const Mat2 K = field.K(y);
  const Mat2 T = matrix_root(K);
  const double sdet = std::sqrt(K.determinant());
  for (int u = 0; u < op.size(); ++u) {
    const Vec2 x = op.grid->unknown_point(u);
    if (x == y) {
      t.Sbar[u] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    t.Sbar[u] = t.G[u] - fundamental((T * (x - y)).norm()) / sdet;
  }
  return t;
}

}  // namespace

GreenTable green_column(const DiscreteOperator& op, const CoefficientField& field, const Vec2& y,
                        const SolverOptions& solver) {
  check_source(*op.grid, y, 4.0 * op.grid->h, "green_column");
  return finish_column(op, field, y, solve_linear(op, spike(*op.grid, y), solver));
}

std::vector<GreenTable> green_columns(const DiscreteOperator& op, const CoefficientField& field,
                                      const std::vector<Vec2>& ys) {
  for (const auto& y : ys) check_source(*op.grid, y, 4.0 * op.grid->h, "green_columns");
  op.factorization();
  std::vector<GreenTable> out(ys.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < static_cast<int>(ys.size()); ++k) out[k] = green_column(op, field, ys[k]);
  return out;
}

RobinEstimate robin_from_column(const GreenTable& column, int ring_points) {
  const double h = column.grid->h;
  check_source(*column.grid, column.y, 8.0 * h, "robin_value");
  RobinEstimate est;
  double r2[3];
  for (int k = 0; k < 3; ++k) {
    const double r = (4.0 + 2.0 * k) * h;
    r2[k] = r * r;
    double s = 0.0;
    for (int p = 0; p < ring_points; ++p) {
      const double th = 2.0 * kPi * (p + 0.5) / ring_points;
      s += column.regular_at(column.y + r * Vec2(std::cos(th), std::sin(th)));
    }
    est.ring[k] = s / ring_points;
  }
  // quadratic in r^2 through the three rings, evaluated at 0 (Lagrange)
  auto lag = [&](int a, int b, int c) { return r2[b] * r2[c] / ((r2[a] - r2[b]) * (r2[a] - r2[c])); };
  est.value = est.ring[0] * lag(0, 1, 2) + est.ring[1] * lag(1, 0, 2) + est.ring[2] * lag(2, 0, 1);
  // linear extrapolant from the two inner rings as a spread estimate
  const double lin = (est.ring[0] * r2[1] - est.ring[1] * r2[0]) / (r2[1] - r2[0]);
  est.spread = std::fabs(est.value - lin);
  return est;
}

RobinEstimate robin_value(const CoefficientField& field, const Grid2D& grid, const Vec2& y) {
  check_source(grid, y, 8.0 * grid.h, "robin_value");
  const auto op = assemble(grid, field);
  return robin_from_column(green_column(op, field, y));
}

double green_at(const CoefficientField& field, const Grid2D& grid, const Vec2& x, const Vec2& y) {
  if (x == y) throw std::invalid_argument("green_at: coincident points");
  const auto op = assemble(grid, field);
  return green_column(op, field, y).green_at(field, x);
}

double DiskImageGreen::robin(const Vec2& y) const {
  return std::log((radius_ * radius_ - y.squaredNorm()) / radius_) / (2.0 * kPi);
}

double DiskImageGreen::green(const Vec2& x, const Vec2& y) const { return oracle_disk_green(x, y, radius_); }

DirectGreen::DirectGreen(CoefficientField field, const Grid2D& grid)
    : field_(std::move(field)), op_(assemble(grid, field_)) {}

const GreenTable& DirectGreen::column(const Vec2& y) const {
  const auto key = std::make_pair(y[0], y[1]);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  auto t = std::make_shared<GreenTable>(green_column(op_, field_, y));
  const auto est = robin_from_column(*t);
  t->robin = est.value;
  t->spread = est.spread;
  t->has_robin = true;
  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(t));
  return *it->second;
}

double DirectGreen::robin(const Vec2& y) const { return column(y).robin; }

double DirectGreen::green(const Vec2& x, const Vec2& y) const { return column(y).green_at(field_, x); }

GreenCache::GreenCache(CoefficientField field, const Grid2D& grid, const Vec2& center, double radius, int lattice)
    : field_(std::move(field)), n_(lattice) {
  if (lattice < 4) throw std::invalid_argument("GreenCache: lattice must have at least 4 sources per axis");
  step_ = 2.0 * radius / (lattice - 1);
  lo_ = center - Vec2(radius, radius);
  std::vector<Vec2> ys;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) ys.push_back(lo_ + step_ * Vec2(i, j));
  const auto op = assemble(grid, field_);
  tables_ = green_columns(op, field_, ys);
  robin_.resize(tables_.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < static_cast<int>(tables_.size()); ++k) {
    const auto est = robin_from_column(tables_[k]);
    tables_[k].robin = robin_[k] = est.value;
    tables_[k].spread = est.spread;
    tables_[k].has_robin = true;
  }
}

namespace {

// Catmull-Rom weights for parameter t in [0, 1] on nodes -1, 0, 1, 2
void cr_weights(double t, double w[4]) {
  const double t2 = t * t, t3 = t2 * t;
  w[0] = 0.5 * (-t3 + 2 * t2 - t);
  w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
  w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
  w[3] = 0.5 * (t3 - t2);
}

template <class F>
double bicubic(const Vec2& lo, double step, int n, const Vec2& y, F&& value) {
  const Vec2 f = (y - lo) / step;
  if (f[0] < -1e-9 || f[1] < -1e-9 || f[0] > n - 1 + 1e-9 || f[1] > n - 1 + 1e-9) {
    std::ostringstream os;
    os << "GreenCache: point (" << y[0] << ", " << y[1] << ") outside the source lattice";
    throw std::out_of_range(os.str());
  }
  const int i = std::clamp(static_cast<int>(std::floor(f[0])), 0, n - 2);
  const int j = std::clamp(static_cast<int>(std::floor(f[1])), 0, n - 2);
  double wx[4], wy[4];
  cr_weights(f[0] - i, wx);
  cr_weights(f[1] - j, wy);
  double s = 0.0;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      // linear extrapolation of the lattice at its edges
      const int ia = i - 1 + a, jb = j - 1 + b;
      const int ic = std::clamp(ia, 0, n - 1), jc = std::clamp(jb, 0, n - 1);
      double v = value(ic, jc);
      if (ia != ic || jb != jc) {
        const int ic2 = std::clamp(ic + (ic - ia), 0, n - 1), jc2 = std::clamp(jc + (jc - jb), 0, n - 1);
        v = 2.0 * v - value(ic2, jc2);
      }
      s += wx[a] * wy[b] * v;
    }
  }
  return s;
}

}  // namespace

double GreenCache::robin(const Vec2& y) const {
  return bicubic(lo_, step_, n_, y, [&](int i, int j) { return robin_[j * n_ + i]; });
}

double GreenCache::smooth_at_source(int k, const Vec2& x) const {
  const auto& t = tables_[k];
  if (x == t.y) return t.robin;
  if ((x - t.y).norm() <= t.r_excl) {
    // inside the exclusion disk: Robin value plus first-order Taylor from the ring data is not
    // available; use the Robin value, which is the limit of the C^1 part
    return t.robin;
  }
  return t.regular_at(x) + f1_correction(field_, t.y, x) + f2_correction(field_, t.y, x);
}

double GreenCache::smooth_part(const Vec2& x, const Vec2& y) const {
  return bicubic(lo_, step_, n_, y, [&](int i, int j) { return smooth_at_source(j * n_ + i, x); });
}

double GreenCache::green(const Vec2& x, const Vec2& y) const {
  if (x == y) throw std::invalid_argument("GreenCache: coincident points");
  return singular_part(field_, y, x) - f1_correction(field_, y, x) - f2_correction(field_, y, x) +
         smooth_part(x, y);
}

double RotationReducedGreen::robin(const Vec2& y) const { return base_.robin(Vec2(y.norm(), 0.0)); }

double RotationReducedGreen::green(const Vec2& x, const Vec2& y) const {
  const double r = y.norm();
  if (r == 0.0) return base_.green(x, y);
  const Mat2 R = rotation_cw(std::atan2(y[1], y[0]));
  return base_.green(R * x, Vec2(r, 0.0));
}

}  // namespace vclust
