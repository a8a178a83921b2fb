#pragma once

#include <string>
#include <vector>

#include "vclust/ansatz.hpp"

namespace vclust {

/// Displayed: q(z_j) and ln(1/eps) with the leading, self, Robin and interaction terms.
/// Expansion: the pre-substitution form in qhat_j and ln(1/s_j) (needs solved amplitudes).
enum class EnergyForm { Displayed, Expansion };

struct ReducedEnergyTerms {
  double leading = 0.0;
  double self = 0.0;
  double robin = 0.0;
  double interaction = 0.0;
  double total = 0.0;
  double error_budget = 0.0;  // delta^2 (ln|ln eps|)^2 / |ln eps|^3, reported only
};

struct AdmissibilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// z_i in the open ball B_rho(x0) and min_{i != j} |z_i - z_j| >= |ln eps|^{-M}, M = m^2 + 1.
AdmissibilityReport is_admissible(const ClusterState& cluster);

ReducedEnergyTerms reduced_energy(const CoefficientField& field, const ClusterState& cluster,
                                  const GreenProvider& greens, EnergyForm form = EnergyForm::Displayed);

/// Step pi/m between consecutive vertices (Pi) or 2 pi/m (TwoPi, regular polygon).
enum class AngleConvention { Pi, TwoPi };

/// m points at distance scale |ln eps|^{-1/2} from x0. Throws when a point leaves B_rho(x0).
std::vector<Vec2> polygon_seed(const Vec2& x0, int m, double eps, AngleConvention convention, double rho,
                               double scale = 1.0);

/// Throws std::invalid_argument unless q^2 sqrt(det K) sampled on B_rho(x0) peaks strictly at x0
/// and the ball lies inside the domain.
void validate_landscape(const CoefficientField& field, const Vec2& x0, double rho);

struct MaximizeOptions {
  AngleConvention convention = AngleConvention::TwoPi;
  EnergyForm form = EnergyForm::Displayed;
  unsigned seed = 0;
  int random_starts = 5;
  int max_iter = 3000;
  double size_tol = 1e-9;  // simplex size at convergence, relative to |ln eps|^{-1/2}
  /// Rotate the result so that z_1 lies on the positive x1-axis (rotation-invariant fields with x0 = 0).
  bool canonical_rotation = true;
};

struct MaximizeResult {
  ClusterState cluster;  // amplitudes solved
  ReducedEnergyTerms terms;
  std::vector<double> start_values;  // best total per start, -inf for infeasible starts
  int best_start = -1;
};

/// Multi-start Nelder-Mead maximization of the reduced energy over the admissible set.
MaximizeResult maximize(const CoefficientField& field, int m, double eps, double p, const Vec2& x0, double rho,
                        const GreenProvider& greens, const RadialProfile& profile, const MaximizeOptions& opts = {});

}  // namespace vclust
