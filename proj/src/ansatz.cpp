#include "vclust/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vclust/error.hpp"

namespace vclust {

double delta_of_eps(double eps, double p) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (!(p > 1.0)) throw std::invalid_argument("p must exceed 1");
  return eps * std::pow(std::fabs(std::log(eps)), -(p - 1.0) / 2.0);
}

double ClusterState::min_separation() const {
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m(); ++i)
    for (int j = i + 1; j < m(); ++j) d = std::min(d, (centers[i] - centers[j]).norm());
  return d;
}

ClusterState make_cluster(double eps, double p, std::vector<Vec2> centers, const Vec2& x0, double rho) {
  if (centers.empty()) throw std::invalid_argument("a cluster needs at least one center");
  ClusterState c;
  c.eps = eps;
  c.p = p;
  c.delta = delta_of_eps(eps, p);
  c.centers = std::move(centers);
  c.x0 = x0;
  c.rho = rho;
  return c;
}

double Bubble::value(const Vec2& x) const {
  const double r = rho(x);
  if (r <= s) return qhat + amplitude * profile->value(r / s);
  return qhat * std::log(r) / std::log(s);
}

double Bubble::inner_slope() const { return amplitude * profile->dphi1 / s; }
double Bubble::outer_slope() const { return qhat / (s * std::log(s)); }
double Bubble::slope_jump() const { return std::fabs(inner_slope() - outer_slope()) / std::fabs(outer_slope()); }
double Bubble::inner_interface() const { return qhat + amplitude * profile->value(1.0); }
double Bubble::outer_interface() const { return qhat * std::log(s) / std::log(s); }

Bubble make_bubble(const CoefficientField& field, const Vec2& xhat, double qhat, double delta,
                   std::shared_ptr<const RadialProfile> profile) {
  if (!profile) throw std::invalid_argument("make_bubble: missing profile");
  if (!(qhat > 0.0)) throw std::invalid_argument("make_bubble: qhat must be positive");
  if (!contains_strict(field.domain, xhat)) throw std::invalid_argument("make_bubble: center outside the domain");
  const CoreScale cs = solve_core_scale(delta, qhat, *profile);
  Bubble b;
  b.center = xhat;
  b.qhat = qhat;
  b.delta = delta;
  b.s = cs.s;
  b.p = profile->p;
  b.K = field.K(xhat);
  b.T = matrix_root(b.K);
  b.amplitude = std::pow(delta / cs.s, 2.0 / (profile->p - 1.0));
  b.profile = std::move(profile);
  return b;
}

namespace {

// Operator norm of the SPD matrix T.
double spectral_norm(const Mat2& T) {
  const double tr = T.trace(), det = T.determinant();
  return tr / 2.0 + std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
}

CoefficientField frozen(const CoefficientField& field, const Mat2& K) {
  CoefficientField f = field;
  f.name = field.name + "-frozen";
  f.K = [K](const Vec2&) { return K; };
  f.dK = [](const Vec2&) { return MatGrad{}; };
  f.constant_K = true;
  return f;
}

}  // namespace

BubbleSamples single_ansatz(const CoefficientField& field, const Vec2& xhat, double qhat, double delta,
                            std::shared_ptr<const RadialProfile> profile, const Grid2D& grid) {
  BubbleSamples out;
  out.bubble = make_bubble(field, xhat, qhat, delta, std::move(profile));
  const Bubble& b = out.bubble;
  const double need = 8.0 * grid.h * spectral_norm(b.T);
  if (b.s < need) {
    std::ostringstream os;
    os << "core under-resolved: s_delta = " << b.s << " < 8 h ||T|| = " << need
       << "; use a finer grid or a larger eps";
    throw std::invalid_argument(os.str());
  }
  const auto pts = grid.unknown_points();
  out.V.resize(grid.size());
  for (int u = 0; u < grid.size(); ++u) out.V[u] = b.value(pts[u]);
  return out;
}

void projection_term(const DiscreteOperator& op, const CoefficientField& field, BubbleSamples& bubble) {
  const Bubble& b = bubble.bubble;
  const DiscreteOperator frozen_op = assemble(*op.grid, frozen(field, b.K), 1.0);
  bubble.source = frozen_op.apply_function([&b](const Vec2& x) { return b.value(x); });
  bubble.W = solve_linear(op, bubble.source);
  bubble.H = bubble.W - bubble.V;
}

AmplitudeReport solve_amplitudes(const CoefficientField& field, ClusterState& cluster, const RadialProfile& profile,
                                 const GreenProvider& greens, const AmplitudeOptions& opts) {
  const int m = cluster.m();
  if (m < 1) throw std::invalid_argument("solve_amplitudes: empty cluster");
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  std::vector<double> q0(m), sq(m);
  Eigen::MatrixXd G(m, m);
  for (int i = 0; i < m; ++i) {
    q0[i] = field.q(cluster.centers[i]);
    sq[i] = std::sqrt(field.det_K(cluster.centers[i]));
    G(i, i) = greens.robin(cluster.centers[i]);
  }
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      G(i, j) = G(j, i) = 0.5 * (greens.green(cluster.centers[i], cluster.centers[j]) +
                                 greens.green(cluster.centers[j], cluster.centers[i]));
  const double upper = 2.0 * *std::max_element(q0.begin(), q0.end());

  std::vector<double> s(m);
  auto phi = [&](const std::vector<double>& qh, std::vector<double>& out) {
    std::vector<double> c(m);
    for (int j = 0; j < m; ++j) {
      s[j] = solve_core_scale(cluster.delta, qh[j], profile).s;
      c[j] = 2.0 * kPi * qh[j] * sq[j] / std::log(s[j]);
    }
    out.assign(m, 0.0);
    for (int i = 0; i < m; ++i) {
      out[i] = q0[i];
      for (int j = 0; j < m; ++j) out[i] += c[j] * G(i, j);
    }
  };
  auto dist = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (int i = 0; i < m; ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
  };

  AmplitudeReport rep;
  std::vector<double> qh = q0, f, qn(m), fn;
  phi(qh, f);
  for (int it = 0;; ++it) {
    rep.residual = dist(f, qh);
    rep.history.push_back(rep.residual);
    rep.iterations = it;
    if (rep.residual <= opts.tol) break;
    if (it >= opts.max_iter) {
      std::ostringstream os;
      os << "amplitude iteration did not converge in " << opts.max_iter << " steps (residual " << rep.residual << ")";
      throw NumericalError(os.str());
    }
    for (int i = 0; i < m; ++i) {
      qn[i] = qh[i] + opts.damping * (f[i] - qh[i]);
      if (!(qn[i] > 0.0 && qn[i] <= upper)) {
        std::ostringstream os;
        os << "amplitude iteration left (0, 2 max q]: qhat_" << i << " = " << qn[i]
           << "; eps is too large for this configuration";
        throw NumericalError(os.str());
      }
    }
    phi(qn, fn);
    const double step = dist(qn, qh);
    if (step > 0.0) rep.contraction = std::max(rep.contraction, dist(fn, f) / step);
    qh = qn;
    f = fn;
  }
  cluster.qhat = qh;
  cluster.s.resize(m);
  for (int j = 0; j < m; ++j) cluster.s[j] = solve_core_scale(cluster.delta, qh[j], profile).s;
  return rep;
}

namespace {

// True when the ellipses |T_a (x - a)| <= ra and |T_b (x - b)| <= rb intersect (boundary sampling).
bool ellipses_meet(const Bubble& A, double ra, const Bubble& B, double rb) {
  if (A.rho(B.center) <= ra || B.rho(A.center) <= rb) return true;
  const Mat2 Ainv = A.T.inverse(), Binv = B.T.inverse();
  const int n = 720;
  for (int k = 0; k < n; ++k) {
    const double t = 2.0 * kPi * k / n;
    const Vec2 e(std::cos(t), std::sin(t));
    if (B.rho(A.center + Ainv * (ra * e)) <= rb) return true;
    if (A.rho(B.center + Binv * (rb * e)) <= ra) return true;
  }
  return false;
}

}  // namespace

AnsatzField composite_ansatz(const DiscreteOperator& op, const CoefficientField& field, const ClusterState& cluster,
                             std::shared_ptr<const RadialProfile> profile, const AnsatzOptions& opts) {
  const int m = cluster.m();
  if (static_cast<int>(cluster.qhat.size()) != m) throw std::invalid_argument("composite_ansatz: amplitudes not solved");
  const Grid2D& grid = *op.grid;
  AnsatzField out;
  out.grid = op.grid;
  out.cluster = cluster;
  out.bubbles.resize(m);
  for (int j = 0; j < m; ++j)
    out.bubbles[j] = single_ansatz(field, cluster.centers[j], cluster.qhat[j], cluster.delta, profile, grid);

  const double scale = opts.relaxed ? 1.0 : opts.L;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const Bubble& a = out.bubbles[i].bubble;
      const Bubble& b = out.bubbles[j].bubble;
      if (ellipses_meet(a, scale * a.s, b, scale * b.s)) {
        std::ostringstream os;
        os << (opts.relaxed ? "cores" : "enlarged cores") << " of centers " << i << " and " << j
           << " overlap; the cluster is outside the admissible resolution regime";
        throw std::invalid_argument(os.str());
      }
    }
  }
  op.factorization();
#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < m; ++j) projection_term(op, field, out.bubbles[j]);

  out.V = Vector::Zero(grid.size());
  for (const auto& b : out.bubbles) out.V += b.W;
  out.sign = check_signs(out, field, opts.L, opts.gamma);
  return out;
}

SignCheck check_signs(const AnsatzField& ansatz, const CoefficientField& field, double L, double gamma) {
  SignCheck sc;
  sc.L = L;
  sc.gamma = gamma;
  const Grid2D& grid = *ansatz.grid;
  const double shrink = 1.0 - L * std::pow(ansatz.cluster.eps, gamma);
  for (int u = 0; u < grid.size(); ++u) {
    const Vec2 x = grid.unknown_point(u);
    const double d = ansatz.V[u] - field.q(x);
    bool inner = false, outer = true;
    for (const auto& bs : ansatz.bubbles) {
      const double r = bs.bubble.rho(x);
      if (shrink > 0.0 && r <= shrink * bs.bubble.s) inner = true;
      if (r <= L * bs.bubble.s) outer = false;
    }
    if (inner) {
      ++sc.inner_nodes;
      if (!(d > 0.0)) ++sc.inner_violations;
    }
    if (outer) {
      ++sc.outer_nodes;
      if (!(d < 0.0)) ++sc.outer_violations;
    }
  }
  return sc;
}

double AnsatzField::near_center_deviation(const CoefficientField& field, int i) const {
  const Bubble& b = bubbles.at(i).bubble;
  double worst = 0.0;
  for (int u = 0; u < grid->size(); ++u) {
    const Vec2 x = grid->unknown_point(u);
    if (b.rho(x) > sign.L * b.s) continue;
    worst = std::max(worst, std::fabs((V[u] - field.q(x)) - (b.value(x) - b.qhat)));
  }
  return worst;
}

}  // namespace vclust
