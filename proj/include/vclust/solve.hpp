#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vclust/ansatz.hpp"
#include "vclust/reduce.hpp"

namespace vclust {

/// I_delta(v) = (delta^2/2) h^2 v^T A v - h^2 sum (v - q)_+^{p+1} / (p + 1).
double full_energy(const DiscreteOperator& op, const CoefficientField& field, const Vector& v, double delta, double p);

/// One connected piece of {v > q} (4-connectivity on the lattice).
struct SupportComponent {
  std::vector<int> unknowns;
  Vec2 center = Vec2::Zero();   // weighted by (v - q)_+^p
  double diameter = 0.0;        // max node distance
  double enclosing_radius = 0.0;  // smallest center ball holding every node
  double inscribed_radius = 0.0;  // distance from center to the nearest node outside the component
  double clearance = 0.0;         // min distance of a node to the domain boundary
  double circulation = 0.0;       // (|ln eps| / delta^2) h^2 sum (v - q)_+^p
  double reference = 0.0;         // 2 pi q(center) sqrt(det K(center))
};

struct SolveResult {
  std::shared_ptr<const Grid2D> grid;
  Vector v;
  double eps = 0.0, p = 2.0, delta = 0.0;
  double residual = 0.0;   // max |delta^2 A v - (v - q)_+^p|
  double tolerance = 0.0;  // residual target
  int iterations = 0;
  std::vector<double> history;  // residual before each Newton step and at exit
  double min_pivot = 0.0;       // smallest |pivot| of the last Jacobian factorization
  bool lu_fallback = false;
  bool trivial = false;  // converged to a solution without support
  std::vector<SupportComponent> components;
  double total_circulation = 0.0;
  double energy = 0.0;
};

struct NewtonOptions {
  double rel_tol = 1e-10;  // relative to max (v0 - q)_+^p
  int max_iter = 50;
  double armijo = 1e-4;
  double min_step = 1.0 / 1024.0;
  Parallel parallel = Parallel::OpenMP;
};

/// Damped Newton for delta^2 A v = (v - q)_+^p with zero Dirichlet data, started at v0.
/// Throws NumericalError on a singular Jacobian, on divergence and when the converged support touches the boundary.
SolveResult newton_solve(const DiscreteOperator& op, const CoefficientField& field, double eps, double p,
                         const Vector& v0, const NewtonOptions& opts = {});

struct DiagnosticsReport {
  std::vector<SupportComponent> components;
  double total_circulation = 0.0;
  double cluster_reference = 0.0;  // 2 pi m q(x0) sqrt(det K(x0))
  double max_residual = 0.0;
};

/// Support components and circulations of v.
std::vector<SupportComponent> support_components(const Grid2D& grid, const CoefficientField& field, const Vector& v,
                                                 double eps, double p);
DiagnosticsReport diagnostics(const SolveResult& result, const CoefficientField& field, const Vec2& x0);

/// Circulation predicted from the bubble matching: 2 pi qhat sqrt(det K(z)) |ln eps| / ln(1/s).
double bubble_circulation(const CoefficientField& field, const ClusterState& cluster, int j);

struct PicardOptions {
  double tol = 1e-10;  // on max |omega_{n+1} - omega_n| relative to max |omega|
  int max_iter = 100;
  /// Rejects L when its smallest |eigenvalue| is below this multiple of delta^2 lambda_1(A).
  double singular_ratio = 1e-6;
  int power_steps = 60;
};

struct PicardResult {
  Vector omega;
  int iterations = 0;
  bool converged = false;
  double increment = 0.0;  // last max |omega_{n+1} - omega_n|
  double norm = 0.0;       // max |omega|
  double smallest_eigenvalue = 0.0;  // estimate of min |lambda(L)|
  double initial_residual = 0.0;     // max |l + R(0)|
};

/// Fixed point of omega = L^{-1}(l + R(omega)) around the ansatz V, L the linearization at V,
/// l = (V - q)_+^p - delta^2 A V and R the remainder beyond first order.
/// Throws NumericalError when L is near singular.
PicardResult picard_error_iteration(const DiscreteOperator& op, const CoefficientField& field, double eps, double p,
                                    const Vector& V, const PicardOptions& opts = {});

enum class SeedMode { Reduce, Manual };

struct LadderOptions {
  std::vector<double> eps = {0.2, 0.1, 0.05};
  SeedMode seed = SeedMode::Reduce;
  std::vector<Vec2> centers;  // manual seed, shared by every rung
  bool warm_start = true;     // start each rung after the first from the parent solution
  NewtonOptions newton;
  MaximizeOptions maximize;
  /// The ansatz only seeds Newton here, so only the cores themselves must be disjoint.
  AnsatzOptions ansatz = relaxed_ansatz();

  static AnsatzOptions relaxed_ansatz() {
    AnsatzOptions a;
    a.relaxed = true;
    return a;
  }
};

struct LadderRung {
  double eps = 0.0;
  ClusterState cluster;  // centers and amplitudes of this rung's ansatz
  Vector ansatz;         // composite ansatz V of this rung
  SolveResult result;
  bool warm = false;  // result was started from the parent
  double seconds = 0.0;
};

/// Continuation along a decreasing eps ladder. Each rung builds the cluster (reduced-energy maximizer or
/// manual centers) and its ansatz V. With warm_start, Newton starts from V plus the parent's correction
/// v - V and falls back to V alone when that start fails or loses a component.
std::vector<LadderRung> solve_ladder(const DiscreteOperator& op, const CoefficientField& field, int m, double p,
                                     const Vec2& x0, double rho, const GreenProvider& greens,
                                     std::shared_ptr<const RadialProfile> profile, const LadderOptions& opts = {});

}  // namespace vclust
