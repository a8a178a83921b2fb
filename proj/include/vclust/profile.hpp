#pragma once

#include <memory>
#include <vector>

namespace vclust {

/// Ground state of -lap(phi) = phi^p on the unit disk, phi(1) = 0, phi > 0.
struct RadialProfile {
  double p = 2.0;
  double a = 0.0;      // phi(0)
  double dphi1 = 0.0;  // phi'(1) < 0
  std::vector<double> r, phi, dphi, d2phi;  // uniform knots on [0, 1]

  /// Rebuilds the interpolant after the knot data changed.
  void finalize();
  double value(double rr) const;       // 0 for rr >= 1
  double derivative(double rr) const;  // phi'(1) for rr >= 1
  double second_derivative(double rr) const;
  /// Max over knot midpoints of |phi'' + phi'/r + phi^p| (r = 0 limit at the first knot).
  double ode_residual() const;

 private:
  struct Interp;
  std::shared_ptr<const Interp> interp_;
};

struct ProfileOptions {
  int knots = 8000;
  double ode_tol = 1e-13;  // absolute and relative tolerance of the Runge-Kutta stepper
  double series_radius = 1e-4;
};

/// Shooting on phi(0) with adaptive Dormand-Prince integration.
RadialProfile compute_profile(double p, double tol = 1e-12, const ProfileOptions& opts = {});

struct PohozaevResidual {
  double res1 = 0.0;  // |int phi^{p+1} - pi (p+1)/2 phi'(1)^2| / (pi (p+1)/2 phi'(1)^2)
  double res2 = 0.0;  // |int phi^p - 2 pi |phi'(1)|| / (2 pi |phi'(1)|)
  double int_p = 0.0, int_p1 = 0.0;
};

/// Integrals over the unit disk with Gauss-Legendre rules of `order` points per knot block.
PohozaevResidual pohozaev_check(const RadialProfile& profile, int order = 15);

/// Core scale s solving delta^{2/(p-1)} s^{-2/(p-1)} phi'(1) = qhat / ln s with s < 1/e.
struct CoreScale {
  double delta = 0.0;
  double qhat = 0.0;
  double s = 0.0;
  double residual = 0.0;  // relative mismatch of the two sides
  double ratio = 0.0;     // s / (delta |ln delta|^{(p-1)/2})
};

/// Largest delta for which the core-scale equation has a root with s < 1/e.
double core_scale_delta_max(double qhat, const RadialProfile& profile);
CoreScale solve_core_scale(double delta, double qhat, const RadialProfile& profile);

/// w = phi on r <= 1 and phi'(1) ln r outside.
class ExtendedProfile {
 public:
  explicit ExtendedProfile(RadialProfile profile) : profile_(std::move(profile)) {}
  double operator()(double r) const;
  double derivative(double r) const;

 private:
  RadialProfile profile_;
};

ExtendedProfile extended_profile(const RadialProfile& profile);

}  // namespace vclust
