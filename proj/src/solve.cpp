#include "vclust/solve.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vclust/error.hpp"
#include "vclust/kernels.hpp"

namespace vclust {

namespace {

Vector sample_q(const Grid2D& grid, const CoefficientField& field) {
  Vector q(grid.size());
  for (int u = 0; u < grid.size(); ++u) q[u] = field.q(grid.unknown_point(u));
  return q;
}

Vector plus_power(const Vector& v, const Vector& q, double p, Parallel par) {
  Vector out(v.size());
  const size_t n = static_cast<size_t>(v.size());
  if (par == Parallel::OpenMP)
    kernels::omp::plus_power(n, v.data(), q.data(), p, out.data());
  else
    kernels::serial::plus_power(n, v.data(), q.data(), p, out.data());
  return out;
}

Vector plus_power_derivative(const Vector& v, const Vector& q, double p, Parallel par) {
  Vector out(v.size());
  const size_t n = static_cast<size_t>(v.size());
  if (par == Parallel::OpenMP)
    kernels::omp::plus_power_derivative(n, v.data(), q.data(), p, out.data());
  else
    kernels::serial::plus_power_derivative(n, v.data(), q.data(), p, out.data());
  return out;
}

double max_abs(const Vector& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; }

// delta^2 A - diag(d), factorized by LDL^T with an LU fallback when a pivot is tiny.
class JacobianSolver {
 public:
  JacobianSolver(const SparseMatrix& A, double d2) : base_(d2 * A) { ldlt_.analyzePattern(base_); }

  void factor(const Vector& d) {
    J_ = base_;
    J_.diagonal() -= d;
    ldlt_.factorize(J_);
    lu_ = false;
    double lo = 0.0, hi = 0.0;
    if (ldlt_.info() == Eigen::Success) {
      const Vector a = ldlt_.vectorD().cwiseAbs();
      lo = a.minCoeff();
      hi = a.maxCoeff();
      min_pivot_ = lo;
    }
    if (ldlt_.info() != Eigen::Success || !(lo > 1e-13 * hi)) {
      lu_ = true;
      J_.makeCompressed();
      lu_solver_.compute(J_);
      if (lu_solver_.info() != Eigen::Success) {
        std::ostringstream os;
        os << "Jacobian is singular to working precision (smallest LDL^T pivot " << lo << ", largest " << hi << ")";
        throw NumericalError(os.str());
      }
    }
  }

  Vector solve(const Vector& b) const { return lu_ ? Vector(lu_solver_.solve(b)) : Vector(ldlt_.solve(b)); }
  double min_pivot() const { return min_pivot_; }
  bool lu() const { return lu_; }

 private:
  SparseMatrix base_, J_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_solver_;
  double min_pivot_ = 0.0;
  bool lu_ = false;
};

}  // namespace

double full_energy(const DiscreteOperator& op, const CoefficientField& field, const Vector& v, double delta, double p) {
  const Grid2D& g = *op.grid;
  if (v.size() != g.size()) throw std::invalid_argument("full_energy: sample count does not match the grid");
  const double h2 = g.h * g.h;
  const Vector q = sample_q(g, field);
  const Vector f = plus_power(v, q, p + 1.0, Parallel::OpenMP);
  const double quad = v.dot(op.apply(v));
  return 0.5 * delta * delta * h2 * quad - h2 * f.sum() / (p + 1.0);
}

std::vector<SupportComponent> support_components(const Grid2D& g, const CoefficientField& field, const Vector& v,
                                                 double eps, double p) {
  const double delta = delta_of_eps(eps, p);
  const double scale = std::fabs(std::log(eps)) / (delta * delta) * g.h * g.h;
  const Vector q = sample_q(g, field);
  std::vector<int> label(g.size(), -1);
  std::vector<SupportComponent> out;
  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int start = 0; start < g.size(); ++start) {
    if (label[start] >= 0 || !(v[start] > q[start])) continue;
    const int id = static_cast<int>(out.size());
    SupportComponent c;
    std::vector<int> stack{start};
    label[start] = id;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      c.unknowns.push_back(u);
      const int n = g.node_of[u], i = n % g.nx, j = n / g.nx;
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
        const int w = g.unknown[g.node(ii, jj)];
        if (w < 0 || label[w] >= 0 || !(v[w] > q[w])) continue;
        label[w] = id;
        stack.push_back(w);
      }
    }
    std::sort(c.unknowns.begin(), c.unknowns.end());
    out.push_back(std::move(c));
  }

  for (auto& c : out) {
    double mass = 0.0;
    Vec2 moment = Vec2::Zero();
    c.clearance = 1e300;
    std::vector<Vec2> edge, outside;
    for (int u : c.unknowns) {
      const Vec2 x = g.unknown_point(u);
      const double w = std::pow(v[u] - q[u], p);
      mass += w;
      moment += w * x;
      c.clearance = std::min(c.clearance, distance_to_boundary(g.domain, x));
      const int n = g.node_of[u], i = n % g.nx, j = n / g.nx;
      bool is_edge = false;
      for (int k = 0; k < 4; ++k) {
        const int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= g.nx || jj >= g.ny) continue;
        const int nb = g.node(ii, jj);
        const int w2 = g.unknown[nb];
        if (w2 >= 0 && v[w2] > q[w2]) continue;
        is_edge = true;
        outside.push_back(g.node_point(nb));
      }
      if (is_edge) edge.push_back(x);
    }
    c.circulation = scale * mass;
    c.center = mass > 0.0 ? Vec2(moment / mass) : g.unknown_point(c.unknowns.front());
    for (int u : c.unknowns) c.enclosing_radius = std::max(c.enclosing_radius, (g.unknown_point(u) - c.center).norm());
    c.inscribed_radius = 1e300;
    for (const auto& x : outside) c.inscribed_radius = std::min(c.inscribed_radius, (x - c.center).norm());
    for (size_t a = 0; a < edge.size(); ++a)
      for (size_t b = a + 1; b < edge.size(); ++b) c.diameter = std::max(c.diameter, (edge[a] - edge[b]).norm());
    const double qc = field.q(c.center);
    c.reference = 2.0 * kPi * qc * std::sqrt(field.det_K(c.center));
  }
  return out;
}

SolveResult newton_solve(const DiscreteOperator& op, const CoefficientField& field, double eps, double p,
                         const Vector& v0, const NewtonOptions& opts) {
  if (!(p > 1.0)) throw std::invalid_argument("newton_solve: p must exceed 1");
  const Grid2D& g = *op.grid;
  if (v0.size() != g.size()) throw std::invalid_argument("newton_solve: initial guess does not match the grid");
  SolveResult res;
  res.grid = op.grid;
  res.eps = eps;
  res.p = p;
  res.delta = delta_of_eps(eps, p);
  const double d2 = res.delta * res.delta;
  const Vector q = sample_q(g, field);

  auto residual = [&](const Vector& v) -> Vector { return d2 * op.apply(v, opts.parallel) - plus_power(v, q, p, opts.parallel); };

  Vector v = v0;
  Vector F = residual(v);
  res.tolerance = opts.rel_tol * max_abs(plus_power(v0, q, p, opts.parallel));
  double fmax = max_abs(F);
  res.history.push_back(fmax);
  JacobianSolver jac(op.A, d2);
  while (fmax > res.tolerance) {
    if (res.iterations >= opts.max_iter) {
      std::ostringstream os;
      os << "Newton did not converge in " << opts.max_iter << " iterations; residual history:";
      for (double r : res.history) os << ' ' << r;
      throw NumericalError(os.str());
    }
    jac.factor(plus_power_derivative(v, q, p, opts.parallel));
    res.min_pivot = jac.min_pivot();
    res.lu_fallback = res.lu_fallback || jac.lu();
    const Vector dv = jac.solve(-F);
    // Armijo backtracking on the Euclidean residual norm
    const double f0 = F.norm();
    double t = 1.0;
    Vector vt, Ft;
    while (true) {
      vt = v + t * dv;
      Ft = residual(vt);
      if (Ft.norm() <= (1.0 - opts.armijo * t) * f0 || t <= opts.min_step) break;
      t *= 0.5;
    }
    v = std::move(vt);
    F = std::move(Ft);
    fmax = max_abs(F);
    ++res.iterations;
    res.history.push_back(fmax);
  }

  res.v = v;
  res.residual = fmax;
  res.components = support_components(g, field, v, eps, p);
  res.trivial = res.components.empty();
  for (const auto& c : res.components) {
    res.total_circulation += c.circulation;
    if (!(c.clearance >= 2.0 * g.h)) {
      std::ostringstream os;
      os << "converged support reaches within " << c.clearance << " of the boundary (needs >= 2h = " << 2.0 * g.h << ")";
      throw NumericalError(os.str());
    }
  }
  res.energy = full_energy(op, field, v, res.delta, p);
  return res;
}

DiagnosticsReport diagnostics(const SolveResult& result, const CoefficientField& field, const Vec2& x0) {
  DiagnosticsReport rep;
  rep.components = support_components(*result.grid, field, result.v, result.eps, result.p);
  for (const auto& c : rep.components) rep.total_circulation += c.circulation;
  rep.cluster_reference = 2.0 * kPi * static_cast<double>(rep.components.size()) * field.q(x0) * std::sqrt(field.det_K(x0));
  rep.max_residual = result.residual;
  return rep;
}

double bubble_circulation(const CoefficientField& field, const ClusterState& c, int j) {
  if (static_cast<int>(c.qhat.size()) != c.m()) throw std::invalid_argument("bubble_circulation: amplitudes not solved");
  return 2.0 * kPi * c.qhat[j] * std::sqrt(field.det_K(c.centers[j])) * std::fabs(std::log(c.eps)) /
         std::log(1.0 / c.s[j]);
}

PicardResult picard_error_iteration(const DiscreteOperator& op, const CoefficientField& field, double eps, double p,
                                    const Vector& V, const PicardOptions& opts) {
  const Grid2D& g = *op.grid;
  if (V.size() != g.size()) throw std::invalid_argument("picard_error_iteration: ansatz does not match the grid");
  const double delta = delta_of_eps(eps, p), d2 = delta * delta;
  const Vector q = sample_q(g, field);
  const Vector f0 = plus_power(V, q, p, Parallel::OpenMP);
  const Vector df0 = plus_power_derivative(V, q, p, Parallel::OpenMP);
  const Vector l = f0 - d2 * op.apply(V);
  auto remainder = [&](const Vector& w) -> Vector {
    return plus_power(V + w, q, p, Parallel::OpenMP) - f0 - df0.cwiseProduct(w);
  };

  JacobianSolver jac(op.A, d2);
  jac.factor(df0);
  PicardResult res;

  // inverse power iteration: the dominant eigenvalue of L^{-1} is 1 / min |lambda(L)|
  Vector x = Vector::Ones(g.size()).normalized();
  double mu = 0.0;
  for (int k = 0; k < opts.power_steps; ++k) {
    Vector y = jac.solve(x);
    mu = y.norm();
    if (!(mu > 0.0) || !std::isfinite(mu)) break;
    x = y / mu;
  }
  res.smallest_eigenvalue = mu > 0.0 && std::isfinite(mu) ? 1.0 / mu : 0.0;
  const double lambda1 = lanczos_min_ritz(op.A);
  if (!(res.smallest_eigenvalue > opts.singular_ratio * d2 * lambda1)) {
    std::ostringstream os;
    os << "linearized operator is near singular (min |eigenvalue| ~ " << res.smallest_eigenvalue
       << ", threshold " << opts.singular_ratio * d2 * lambda1
       << "); the approximate kernel along the center translations is not projected out here, use newton_solve";
    throw NumericalError(os.str());
  }

  Vector w = Vector::Zero(g.size());
  res.initial_residual = max_abs(l);
  for (int it = 0; it < opts.max_iter; ++it) {
    const Vector next = jac.solve(l + remainder(w));
    res.increment = max_abs(next - w);
    w = next;
    res.iterations = it + 1;
    if (!std::isfinite(res.increment)) throw NumericalError("Picard error iteration diverged");
    if (res.increment <= opts.tol * std::max(max_abs(w), 1e-300)) {
      res.converged = true;
      break;
    }
  }
  res.omega = w;
  res.norm = max_abs(w);
  return res;
}

std::vector<LadderRung> solve_ladder(const DiscreteOperator& op, const CoefficientField& field, int m, double p,
                                     const Vec2& x0, double rho, const GreenProvider& greens,
                                     std::shared_ptr<const RadialProfile> profile, const LadderOptions& opts) {
  if (opts.eps.empty()) throw std::invalid_argument("solve_ladder: empty eps ladder");
  for (size_t k = 1; k < opts.eps.size(); ++k)
    if (!(opts.eps[k] < opts.eps[k - 1])) throw std::invalid_argument("solve_ladder: eps ladder must decrease");
  if (opts.seed == SeedMode::Manual && static_cast<int>(opts.centers.size()) != m)
    throw std::invalid_argument("solve_ladder: manual seed needs exactly m centers");

  std::vector<LadderRung> rungs;
  for (double eps : opts.eps) {
    const auto t0 = std::chrono::steady_clock::now();
    LadderRung rung;
    rung.eps = eps;
    if (opts.seed == SeedMode::Reduce) {
      rung.cluster = maximize(field, m, eps, p, x0, rho, greens, *profile, opts.maximize).cluster;
    } else {
      rung.cluster = make_cluster(eps, p, opts.centers, x0, rho);
      solve_amplitudes(field, rung.cluster, *profile, greens);
    }
    const auto ansatz = composite_ansatz(op, field, rung.cluster, profile, opts.ansatz);
    rung.ansatz = ansatz.V;
    bool done = false;
    if (opts.warm_start && !rungs.empty()) {
      // the parent's correction v - V carried over to this rung's ansatz
      const Vector v0 = ansatz.V + (rungs.back().result.v - rungs.back().ansatz);
      try {
        rung.result = newton_solve(op, field, eps, p, v0, opts.newton);
        done = static_cast<int>(rung.result.components.size()) == m;
        rung.warm = done;
      } catch (const NumericalError&) {
        done = false;
      }
    }
    if (!done) rung.result = newton_solve(op, field, eps, p, ansatz.V, opts.newton);
    if (rung.result.trivial) {
      std::ostringstream os;
      os << "Newton collapsed to the trivial solution v = 0 at eps = " << eps;
      throw NumericalError(os.str());
    }
    rung.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rungs.push_back(std::move(rung));
  }
  return rungs;
}

}  // namespace vclust
