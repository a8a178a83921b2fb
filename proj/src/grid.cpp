#include "vclust/grid.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "vclust/error.hpp"
#include "vclust/kernels.hpp"

namespace vclust {

namespace {

constexpr int kDi[4] = {1, -1, 0, 0};
constexpr int kDj[4] = {0, 0, 1, -1};
constexpr double kMinArm = 1e-4;  // fraction of h

double crossing(const Domain& domain, const Vec2& x, int dir) {
  if (const auto* d = std::get_if<Disk>(&domain)) {
    const double R2 = d->radius * d->radius;
    if (dir < 2) {
      const double xb = std::sqrt(std::max(0.0, R2 - x[1] * x[1]));
      return dir == 0 ? xb - x[0] : x[0] + xb;
    }
    const double yb = std::sqrt(std::max(0.0, R2 - x[0] * x[0]));
    return dir == 2 ? yb - x[1] : x[1] + yb;
  }
  const auto& r = std::get<Rect>(domain);
  switch (dir) {
    case 0: return r.x1 - x[0];
    case 1: return x[0] - r.x0;
    case 2: return r.y1 - x[1];
    default: return x[1] - r.y0;
  }
}

}  // namespace

std::vector<Vec2> Grid2D::unknown_points() const {
  std::vector<Vec2> pts(node_of.size());
  for (size_t u = 0; u < node_of.size(); ++u) pts[u] = node_point(node_of[u]);
  return pts;
}

Grid2D build_grid(const Domain& domain, double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("build_grid: h must be positive");
  Grid2D g;
  g.domain = domain;
  g.h = h;
  if (const auto* d = std::get_if<Disk>(&domain)) {
    if (!(d->radius > 0.0)) throw std::invalid_argument("build_grid: disk radius must be > 0");
    const int n = static_cast<int>(std::floor(d->radius / h)) + 1;
    g.nx = g.ny = 2 * n + 1;
    g.i0 = g.j0 = n;
    g.base = Vec2::Zero();
  } else {
    const auto& r = std::get<Rect>(domain);
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw std::invalid_argument("build_grid: degenerate rectangle");
    g.nx = static_cast<int>(std::floor((r.x1 - r.x0) / h * (1.0 + 1e-12))) + 2;
    g.ny = static_cast<int>(std::floor((r.y1 - r.y0) / h * (1.0 + 1e-12))) + 2;
    g.base = Vec2(r.x0, r.y0);
    g.i0 = g.j0 = 0;
  }
  const double tol = 1e-12 * domain_scale(domain);
  const size_t nn = static_cast<size_t>(g.nx) * g.ny;
  g.kind.assign(nn, NodeKind::Exterior);
  g.unknown.assign(nn, -1);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double dist = distance_to_boundary(domain, g.point(i, j));
      const int n = g.node(i, j);
      if (dist > tol && i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1) {
        g.kind[n] = NodeKind::Interior;
        g.unknown[n] = static_cast<int>(g.node_of.size());
        g.node_of.push_back(n);
      } else if (std::fabs(dist) <= tol) {
        g.kind[n] = NodeKind::Boundary;
      }
    }
  }
  g.arm.resize(g.node_of.size());
  for (size_t u = 0; u < g.node_of.size(); ++u) {
    const int n = g.node_of[u];
    const int i = n % g.nx, j = n / g.nx;
    const Vec2 x = g.point(i, j);
    for (int d = 0; d < 4; ++d) {
      const int nb = g.node(i + kDi[d], j + kDj[d]);
      if (g.kind[nb] == NodeKind::Interior) {
        g.arm[u][d] = h;
      } else {
        g.arm[u][d] = std::clamp(crossing(domain, x, d), kMinArm * h, h);
      }
    }
  }
  for (int j = 0; j < g.ny; ++j) {
    int c = 0;
    for (int i = 0; i < g.nx; ++i) c += g.kind[g.node(i, j)] == NodeKind::Interior;
    g.interior_x = std::max(g.interior_x, c);
  }
  for (int i = 0; i < g.nx; ++i) {
    int c = 0;
    for (int j = 0; j < g.ny; ++j) c += g.kind[g.node(i, j)] == NodeKind::Interior;
    g.interior_y = std::max(g.interior_y, c);
  }
  if (g.interior_x < 3 || g.interior_y < 3) {
    std::ostringstream os;
    os << "build_grid: h = " << h << " too coarse for the domain (" << g.interior_x << " x " << g.interior_y
       << " interior nodes)";
    throw std::invalid_argument(os.str());
  }
  return g;
}

void require_resolution(const Grid2D& grid, int min_nodes, const char* who) {
  if (grid.interior_x < min_nodes || grid.interior_y < min_nodes) {
    std::ostringstream os;
    os << who << ": grid has " << grid.interior_x << " x " << grid.interior_y << " interior nodes, need at least "
       << min_nodes << " per axis";
    throw std::invalid_argument(os.str());
  }
}

void stencil_row(const Grid2D& grid, const CoefficientField& field, int u, std::vector<StencilEntry>& out) {
  const double h = grid.h;
  const int n = grid.node_of[u];
  const int i = n % grid.nx, j = n / grid.nx;
  const Vec2 x = grid.point(i, j);
  double diag = 0.0;
  for (int d = 0; d < 4; ++d) {
    const int nb = grid.node(i + kDi[d], j + kDj[d]);
    const int axis = d < 2 ? 0 : 1;
    const double a = grid.arm[u][d];
    Vec2 face;
    if (grid.kind[nb] == NodeKind::Interior) {
      // shared face coordinates computed identically from both sides
      face = Vec2(grid.xcoord(std::min(i, i + kDi[d]) + (axis == 0 ? 0.5 : 0.0)),
                  grid.ycoord(std::min(j, j + kDj[d]) + (axis == 1 ? 0.5 : 0.0)));
    } else {
      face = x + 0.5 * a * Vec2(kDi[d], kDj[d]);
    }
    const double c = field.K(face)(axis, axis) / (h * a);
    diag += c;
    if (grid.kind[nb] == NodeKind::Interior) {
      out.push_back({grid.unknown[nb], Vec2::Zero(), -c});
    } else {
      out.push_back({-1, x + a * Vec2(kDi[d], kDj[d]), -c});
    }
  }
  out.push_back({u, Vec2::Zero(), diag});
  if (field.constant_K && field.K(x)(0, 1) == 0.0) return;
  // mixed term from the four cells around the node
  static constexpr int s1[4] = {-1, 1, -1, 1};  // ll, lr, ul, ur
  static constexpr int s2[4] = {-1, -1, 1, 1};
  for (int cj = -1; cj <= 0; ++cj) {
    for (int ci = -1; ci <= 0; ++ci) {
      int corner[4];
      bool keep = true;
      for (int k = 0; k < 4; ++k) {
        corner[k] = grid.node(i + ci + (k & 1), j + cj + (k >> 1));
        if (grid.kind[corner[k]] == NodeKind::Exterior) keep = false;
      }
      if (!keep) continue;
      const Vec2 center(grid.xcoord(i + ci + 0.5), grid.ycoord(j + cj + 0.5));
      const double k12 = field.K(center)(0, 1);
      if (k12 == 0.0) continue;
      const int self = (-ci) + 2 * (-cj);
      for (int k = 0; k < 4; ++k) {
        const double w = k12 * (s1[self] * s2[k] + s2[self] * s1[k]) / (4.0 * h * h);
        if (w == 0.0) continue;
        if (grid.kind[corner[k]] == NodeKind::Interior) {
          out.push_back({grid.unknown[corner[k]], Vec2::Zero(), w});
        } else {
          out.push_back({-1, grid.node_point(corner[k]), w});
        }
      }
    }
  }
}

DiscreteOperator assemble(const Grid2D& grid, const CoefficientField& field, double prefactor,
                          const AssembleOptions& opts) {
  if (field.domain.index() != grid.domain.index() || bounding_box(field.domain) != bounding_box(grid.domain)) {
    throw std::invalid_argument("assemble: field domain does not match grid domain");
  }
  const int n = grid.size();
  std::vector<std::vector<StencilEntry>> rows(n);
  auto build = [&](int u) {
    rows[u].reserve(16);
    stencil_row(grid, field, u, rows[u]);
  };
  if (opts.parallel == Parallel::OpenMP) {
#pragma omp parallel for schedule(dynamic, 64)
    for (int u = 0; u < n; ++u) build(u);
  } else {
    for (int u = 0; u < n; ++u) build(u);
  }

  DiscreteOperator op;
  op.grid = std::make_shared<const Grid2D>(grid);
  op.prefactor = prefactor;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(n) * 9);
  op.bptr.assign(1, 0);
  for (int u = 0; u < n; ++u) {
    for (const auto& e : rows[u]) {
      if (e.unknown >= 0) {
        trip.emplace_back(u, e.unknown, e.weight);
      } else {
        op.bpoint.push_back(e.point);
        op.bweight.push_back(e.weight);
      }
    }
    op.bptr.push_back(static_cast<int>(op.bpoint.size()));
  }
  op.A.resize(n, n);
  op.A.setFromTriplets(trip.begin(), trip.end());
  op.A.makeCompressed();
  if (opts.symmetrize) {
    SparseMatrix At = op.A.transpose();
    op.A = 0.5 * (op.A + At);
    op.A.makeCompressed();
  }
  SparseMatrix At = op.A.transpose();
  const SparseMatrix diff = op.A - At;
  const double asym = diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0;
  const double amax = op.A.coeffs().cwiseAbs().maxCoeff();
  op.symmetric = asym <= 1e-14 * amax;
  return op;
}

Vector DiscreteOperator::boundary_rhs(const std::function<double(const Vec2&)>& g) const {
  Vector b = Vector::Zero(size());
  for (int u = 0; u < size(); ++u) {
    double s = 0.0;
    for (int k = bptr[u]; k < bptr[u + 1]; ++k) s -= bweight[k] * g(bpoint[k]);
    b[u] = s;
  }
  return b;
}

Vector DiscreteOperator::apply_function(const std::function<double(const Vec2&)>& f) const {
  const auto pts = grid->unknown_points();
  Vector fv(size());
  kernels::omp::sample(pts.size(), f, pts.data(), fv.data());
  Vector out = apply(fv);
  for (int u = 0; u < size(); ++u) {
    for (int k = bptr[u]; k < bptr[u + 1]; ++k) out[u] += bweight[k] * f(bpoint[k]);
  }
  return out;
}

Vector DiscreteOperator::apply(const Vector& x, Parallel par) const {
  Vector y(size());
  // A is symmetric, so its column-compressed arrays read as rows.
  kernels::CsrView v{size(), A.outerIndexPtr(), A.innerIndexPtr(), A.valuePtr()};
  if (par == Parallel::OpenMP) kernels::omp::spmv(v, x.data(), y.data());
  else kernels::serial::spmv(v, x.data(), y.data());
  return y;
}

struct Factorization::Impl {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
};

Factorization::Factorization(const SparseMatrix& A) : impl_(std::make_shared<Impl>()) {
  impl_->ldlt.compute(A);
  if (impl_->ldlt.info() != Eigen::Success) throw NumericalError("LDL^T factorization failed");
  const auto& d = impl_->ldlt.vectorD();
  min_pivot_ = d.size() ? d.minCoeff() : 0.0;
  max_pivot_ = d.size() ? d.maxCoeff() : 0.0;
}

Vector Factorization::solve(const Vector& b) const { return impl_->ldlt.solve(b); }

const Factorization& DiscreteOperator::factorization() const {
  std::lock_guard<std::mutex> lock(cache->mutex);
  if (!cache->factor) cache->factor = std::make_shared<Factorization>(A);
  return *cache->factor;
}

Vector pcg(const SparseMatrix& A, const Vector& rhs, double tol, int maxit, Parallel par, LinearSolveReport* report) {
  namespace ks = kernels::serial;
  namespace ko = kernels::omp;
  const bool omp = par == Parallel::OpenMP;
  const size_t n = static_cast<size_t>(rhs.size());
  kernels::CsrView v{static_cast<int>(n), A.outerIndexPtr(), A.innerIndexPtr(), A.valuePtr()};
  auto spmv = [&](const Vector& x, Vector& y) { omp ? ko::spmv(v, x.data(), y.data()) : ks::spmv(v, x.data(), y.data()); };
  auto dot = [&](const Vector& x, const Vector& y) { return omp ? ko::dot(n, x.data(), y.data()) : ks::dot(n, x.data(), y.data()); };
  auto axpy = [&](double a, const Vector& x, Vector& y) { omp ? ko::axpy(n, a, x.data(), y.data()) : ks::axpy(n, a, x.data(), y.data()); };

  Vector dinv = A.diagonal().cwiseInverse();
  Vector x = Vector::Zero(n), r = rhs, z = dinv.cwiseProduct(r), p = z, Ap(n);
  const double bnorm = std::sqrt(dot(rhs, rhs));
  if (report) *report = {0.0, 0, false};
  if (bnorm == 0.0) return x;
  double rz = dot(r, z);
  double rel = 1.0;
  int it = 0;
  for (; it < maxit; ++it) {
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= tol) break;
    spmv(p, Ap);
    const double alpha = rz / dot(p, Ap);
    axpy(alpha, p, x);
    axpy(-alpha, Ap, r);
    z = dinv.cwiseProduct(r);
    const double rz_new = dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  rel = std::sqrt(dot(r, r)) / bnorm;
  if (report) *report = {rel, it, false};
  if (rel > tol) {
    std::ostringstream os;
    os << "conjugate gradients did not converge in " << maxit << " iterations (relative residual " << rel << ")";
    throw NumericalError(os.str());
  }
  return x;
}

Vector solve_linear(const DiscreteOperator& op, const Vector& rhs, const SolverOptions& opts,
                    LinearSolveReport* report) {
  if (rhs.size() != op.size()) throw std::invalid_argument("solve_linear: dimension mismatch");
  if (!rhs.allFinite()) throw std::invalid_argument("solve_linear: non-finite right-hand side");
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    if (report) *report = {0.0, 0, opts.kind == SolverOptions::Kind::Direct};
    return Vector::Zero(op.size());
  }
  const int maxit = opts.maxit > 0 ? opts.maxit : 10 * op.size();
  const bool direct = opts.kind == SolverOptions::Kind::Direct && op.size() <= 512 * 512;
  if (!direct) return pcg(op.A, rhs, opts.tol, maxit, Parallel::OpenMP, report);

  const Factorization& f = op.factorization();
  if (!f.positive_definite()) {
    std::ostringstream os;
    os << "assembled operator is not positive definite (smallest pivot " << f.min_pivot() << ")";
    throw NumericalError(os.str());
  }
  Vector x = f.solve(rhs);
  Vector r = rhs - op.apply(x);
  double rel = r.norm() / bnorm;
  int steps = 0;
  while (rel > opts.tol && steps < 3) {
    x += f.solve(r);
    r = rhs - op.apply(x);
    rel = r.norm() / bnorm;
    ++steps;
  }
  if (report) *report = {rel, steps, true};
  if (rel > opts.tol) {
    std::ostringstream os;
    os << "direct solve residual " << rel << " above tolerance " << opts.tol;
    throw NumericalError(os.str());
  }
  return x;
}

double lanczos_min_ritz(const SparseMatrix& A, int iters) {
  const int n = static_cast<int>(A.rows());
  iters = std::min(iters, n);
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::MatrixXd Q(n, iters + 1);
  Vector q(n);
  for (int i = 0; i < n; ++i) q[i] = uni(rng);
  Q.col(0) = q.normalized();
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(iters, iters);
  int m = iters;
  for (int k = 0; k < iters; ++k) {
    Vector w = A * Q.col(k);
    T(k, k) = Q.col(k).dot(w);
    // full reorthogonalization
    for (int pass = 0; pass < 2; ++pass) w -= Q.leftCols(k + 1) * (Q.leftCols(k + 1).transpose() * w);
    const double beta = w.norm();
    if (k + 1 < iters) {
      if (beta < 1e-14) {
        m = k + 1;
        break;
      }
      T(k, k + 1) = T(k + 1, k) = beta;
      Q.col(k + 1) = w / beta;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(m, m), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double interpolate(const Grid2D& grid, const Vector& u, const Vec2& x, double outside) {
  const Vec2 f = grid.lattice_coords(x);
  const int i = static_cast<int>(std::floor(f[0])), j = static_cast<int>(std::floor(f[1]));
  if (i < 0 || j < 0 || i + 1 >= grid.nx || j + 1 >= grid.ny) return outside;
  const double tx = f[0] - i, ty = f[1] - j;
  auto val = [&](int a, int b) {
    const int k = grid.unknown[grid.node(a, b)];
    return k >= 0 ? u[k] : outside;
  };
  return (1 - tx) * (1 - ty) * val(i, j) + tx * (1 - ty) * val(i + 1, j) + (1 - tx) * ty * val(i, j + 1) +
         tx * ty * val(i + 1, j + 1);
}

void write_field_csv(const std::string& path, const Grid2D& grid, const Vector& u) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::fprintf(fp, "x1,x2,value\n");
  for (int k = 0; k < grid.size(); ++k) {
    const Vec2 x = grid.unknown_point(k);
    std::fprintf(fp, "%.17g,%.17g,%.17g\n", x[0], x[1], u[k]);
  }
  if (std::fclose(fp) != 0) throw IoError("cannot write " + path + ": " + std::strerror(errno));
}

std::vector<std::array<double, 3>> read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 3>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 3> r{};
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r[0], &r[1], &r[2]) != 3) throw IoError("malformed row in " + path);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace vclust
