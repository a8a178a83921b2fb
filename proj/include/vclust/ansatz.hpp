#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vclust/greens.hpp"
#include "vclust/profile.hpp"

namespace vclust {

/// delta = eps |ln eps|^{-(p-1)/2}.
double delta_of_eps(double eps, double p);

/// Parameters of an m-point cluster and its solved amplitudes.
struct ClusterState {
  double eps = 0.05;
  double p = 2.0;
  double delta = 0.0;
  std::vector<Vec2> centers;
  std::vector<double> qhat;  // empty until solve_amplitudes ran
  std::vector<double> s;     // core scales matching qhat
  Vec2 x0 = Vec2::Zero();
  double rho = 0.5;

  int m() const { return static_cast<int>(centers.size()); }
  /// Exponent M = m^2 + 1 of the separation bound |ln eps|^{-M}.
  int exponent() const { return m() * m() + 1; }
  double min_separation() const;
};

/// Cluster with delta = delta_of_eps(eps, p) and no amplitudes yet.
ClusterState make_cluster(double eps, double p, std::vector<Vec2> centers, const Vec2& x0, double rho);

/// One bubble V_{delta, xhat, qhat}: inner profile branch inside the core ellipse
/// |T(x - xhat)| <= s, logarithmic branch outside.
struct Bubble {
  Vec2 center = Vec2::Zero();
  double qhat = 0.0;
  double delta = 0.0;
  double s = 0.0;
  double p = 2.0;
  Mat2 T = Mat2::Identity();  // K(center)^{-1/2}
  Mat2 K = Mat2::Identity();  // K(center)
  double amplitude = 0.0;     // delta^{2/(p-1)} s^{-2/(p-1)}
  std::shared_ptr<const RadialProfile> profile;

  double rho(const Vec2& x) const { return (T * (x - center)).norm(); }
  double value(const Vec2& x) const;
  /// d/d rho of the inner and outer branches at rho = s.
  double inner_slope() const;
  double outer_slope() const;
  /// |inner - outer| / |outer| at the interface.
  double slope_jump() const;
  /// Value of the inner and outer branches at the interface.
  double inner_interface() const;
  double outer_interface() const;
};

Bubble make_bubble(const CoefficientField& field, const Vec2& xhat, double qhat, double delta,
                   std::shared_ptr<const RadialProfile> profile);

/// Grid samples of one bubble and of its projection.
struct BubbleSamples {
  Bubble bubble;
  Vector V;  // V_{delta, xhat, qhat} at the unknowns
  Vector H;  // projection term
  Vector W;  // V + H, zero Dirichlet data
  Vector source;  // -div(K(xhat) grad V) applied discretely, the right-hand side of A_K W
};

/// Samples V on the grid. Throws std::invalid_argument when s < 8 h ||T||.
BubbleSamples single_ansatz(const CoefficientField& field, const Vec2& xhat, double qhat, double delta,
                            std::shared_ptr<const RadialProfile> profile, const Grid2D& grid);

/// Fills H and W: -div(K grad H) = div((K - K(xhat)) grad V) with H = -V on the boundary.
/// Solved as A_K W = A_{K(xhat)} V with W = V + H vanishing on the boundary.
void projection_term(const DiscreteOperator& op, const CoefficientField& field, BubbleSamples& bubble);

struct AmplitudeOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 500;
};

struct AmplitudeReport {
  int iterations = 0;
  double residual = 0.0;     // max |Phi(qhat) - qhat| at exit
  double contraction = 0.0;  // max observed |Phi(a) - Phi(b)| / |a - b| along the iteration
  std::vector<double> history;  // residual per iteration
};

/// Damped Picard iteration of qhat_i = q(z_i) + sum_j 2 pi qhat_j sqrt(det K(z_j)) / ln s_j * G_ij,
/// G_ii the Robin value. Fills cluster.qhat and cluster.s.
AmplitudeReport solve_amplitudes(const CoefficientField& field, ClusterState& cluster, const RadialProfile& profile,
                                 const GreenProvider& greens, const AmplitudeOptions& opts = {});

struct SignCheck {
  double L = 4.0;
  double gamma = 0.5;
  int inner_nodes = 0;        // nodes inside the shrunken cores
  int inner_violations = 0;   // of those, nodes with V - q <= 0
  int outer_nodes = 0;        // nodes outside the enlarged cores
  int outer_violations = 0;   // of those, nodes with V - q >= 0
  bool ok() const { return inner_violations == 0 && outer_violations == 0; }
};

struct AnsatzOptions {
  double L = 4.0;
  double gamma = 0.5;
  /// Only the cores |T(x - z_j)| <= s_j must be disjoint instead of the enlarged ones.
  bool relaxed = false;
};

struct AnsatzField {
  std::shared_ptr<const Grid2D> grid;
  ClusterState cluster;
  std::vector<BubbleSamples> bubbles;
  Vector V;  // composite sum of W_j
  SignCheck sign;

  /// max over the enlarged i-th core of |(V - q) - (V_i - qhat_i)|.
  double near_center_deviation(const CoefficientField& field, int i) const;
};

/// Sum of bubbles and projections for a cluster whose amplitudes are solved.
AnsatzField composite_ansatz(const DiscreteOperator& op, const CoefficientField& field, const ClusterState& cluster,
                             std::shared_ptr<const RadialProfile> profile, const AnsatzOptions& opts = {});

/// Grid check of the sign structure of V - q.
SignCheck check_signs(const AnsatzField& ansatz, const CoefficientField& field, double L, double gamma);

}  // namespace vclust
