#include "vclust/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "vclust/error.hpp"
#include "vclust/types.hpp"

namespace vclust {

namespace odeint = boost::numeric::odeint;

struct RadialProfile::Interp {
  boost::math::interpolators::quintic_hermite<std::vector<double>> q;
  // phi' interpolated from (phi', phi'') so that phi'/r near the origin is free of cancellation
  boost::math::interpolators::cubic_hermite<std::vector<double>> dq;
};

void RadialProfile::finalize() {
  if (r.size() < 2 || phi.size() != r.size() || dphi.size() != r.size() || d2phi.size() != r.size()) {
    throw std::invalid_argument("RadialProfile: inconsistent knot data");
  }
  auto x = r, y = phi, dy = dphi, d2y = d2phi;
  auto x2 = r, dy2 = dphi, d2y2 = d2phi;
  interp_ = std::make_shared<const Interp>(
      Interp{boost::math::interpolators::quintic_hermite<std::vector<double>>(std::move(x), std::move(y), std::move(dy),
                                                                              std::move(d2y)),
             boost::math::interpolators::cubic_hermite<std::vector<double>>(std::move(x2), std::move(dy2),
                                                                            std::move(d2y2))});
  a = phi.front();
  dphi1 = dphi.back();
}

double RadialProfile::value(double rr) const {
  rr = std::fabs(rr);
  if (rr >= 1.0) return 0.0;
  return interp_->q(rr);
}

double RadialProfile::derivative(double rr) const {
  if (rr >= 1.0) return dphi1;
  if (rr <= 0.0) return 0.0;
  return interp_->dq(rr);
}

double RadialProfile::second_derivative(double rr) const {
  if (rr >= 1.0) return d2phi.back();
  return interp_->dq.prime(std::max(rr, 0.0));
}

double RadialProfile::ode_residual() const {
  double worst = std::fabs(2.0 * d2phi.front() + std::pow(phi.front(), p));
  for (size_t i = 0; i + 1 < r.size(); ++i) {
    const double m = 0.5 * (r[i] + r[i + 1]);
    const double v = interp_->q(m);
    const double res = interp_->dq.prime(m) + interp_->dq(m) / m + std::pow(std::max(v, 0.0), p);
    worst = std::max(worst, std::fabs(res));
  }
  return worst;
}

namespace {

using State = std::array<double, 2>;

struct RadialRhs {
  double p;
  void operator()(const State& x, State& dxdr, double r) const {
    dxdr[0] = x[1];
    dxdr[1] = -x[1] / r - std::pow(std::max(x[0], 0.0), p);
  }
};

// phi = a + c2 r^2 + c4 r^4 + c6 r^6 near the origin
State series(double a, double p, double r) {
  const double c2 = -0.25 * std::pow(a, p);
  const double c4 = p * std::pow(a, 2.0 * p - 1.0) / 64.0;
  const double c6 = -(p * std::pow(a, p - 1.0) * c4 + 0.5 * p * (p - 1.0) * std::pow(a, p - 2.0) * c2 * c2) / 36.0;
  const double r2 = r * r;
  return {a + r2 * (c2 + r2 * (c4 + r2 * c6)), r * (2.0 * c2 + r2 * (4.0 * c4 + 6.0 * c6 * r2))};
}

// radius below which the truncated series is exact to rounding
double series_exact_radius(double a, double p) { return 2e-3 * std::pow(a, -0.5 * (p - 1.0)); }

double series_start(double a, double p, const ProfileOptions& opts) {
  return opts.series_radius * std::min(1.0, std::pow(a, -0.5 * (p - 1.0)));
}

auto make_stepper(const ProfileOptions& opts) {
  return odeint::make_dense_output(opts.ode_tol, opts.ode_tol, odeint::runge_kutta_dopri5<State>());
}

// First zero of phi for phi(0) = a, or rmax when there is none before rmax.
double first_zero(double a, double p, const ProfileOptions& opts, double rmax) {
  const double r0 = series_start(a, p, opts);
  auto stepper = make_stepper(opts);
  stepper.initialize(series(a, p, r0), r0, r0);
  RadialRhs rhs{p};
  while (stepper.current_time() < rmax) {
    stepper.do_step(rhs);
    if (stepper.current_state()[0] <= 0.0) {
      double lo = stepper.previous_time(), hi = stepper.current_time();
      State s;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        stepper.calc_state(mid, s);
        (s[0] > 0.0 ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  return rmax;
}

}  // namespace

RadialProfile compute_profile(double p, double tol, const ProfileOptions& opts) {
  if (!(p > 1.0)) throw std::invalid_argument("compute_profile: p must be > 1");
  if (!(tol >= 1e-12 && tol <= 1e-4)) throw std::invalid_argument("compute_profile: tol must lie in [1e-12, 1e-4]");
  if (opts.knots < 2000) throw std::invalid_argument("compute_profile: at least 2000 knots required");
  const double rmax = 4.0;
  auto F = [&](double a) { return first_zero(a, p, opts, rmax) - 1.0; };

  // geometric bracket scan over [1e-3, 1e3]
  double lo = 1e-3, flo = F(lo), hi = lo, fhi = flo;
  bool found = false;
  for (int k = 0; k < 24 && !found; ++k) {
    hi = lo * std::pow(10.0, 0.25);
    fhi = F(hi);
    if (flo > 0.0 && fhi <= 0.0) found = true;
    else {
      lo = hi;
      flo = fhi;
    }
  }
  if (!found) throw NumericalError("compute_profile: no shooting bracket in a in [1e-3, 1e3]");
  boost::uintmax_t maxit = 200;
  auto stop = [tol](double x, double y) { return std::fabs(x - y) <= 0.25 * tol * std::min(x, y); };
  auto [alo, ahi] = boost::math::tools::toms748_solve(F, lo, hi, flo, fhi, stop, maxit);
  double a = 0.5 * (alo + ahi);
  // scaling symmetry phi_a(r) -> R^{2/(p-1)} phi_a(R r) puts the zero exactly at 1
  const double beta = 2.0 / (p - 1.0);
  a *= std::pow(first_zero(a, p, opts, rmax), beta);
  const double miss = std::fabs(first_zero(a, p, opts, rmax) - 1.0);
  if (miss > tol) {
    std::ostringstream os;
    os << "compute_profile: shooting missed r = 1 by " << miss;
    throw NumericalError(os.str());
  }

  RadialProfile prof;
  prof.p = p;
  const int n = opts.knots;
  prof.r.resize(n + 1);
  prof.phi.resize(n + 1);
  prof.dphi.resize(n + 1);
  prof.d2phi.resize(n + 1);
  const double r0 = series_start(a, p, opts);
  // controlled stepping lands exactly on every knot (no dense-output interpolation)
  auto stepper = odeint::make_controlled(opts.ode_tol, opts.ode_tol, odeint::runge_kutta_dopri5<State>());
  RadialRhs rhs{p};
  State s = series(a, p, r0);
  double rcur = r0, dt = r0;
  for (int i = 0; i <= n; ++i) {
    const double ri = static_cast<double>(i) / n;
    prof.r[i] = ri;
    State si;
    if (ri <= std::max(r0, series_exact_radius(a, p))) {
      si = series(a, p, ri);
    } else {
      if (ri - rcur > 0.0) odeint::integrate_adaptive(stepper, rhs, s, rcur, ri, std::min(dt, ri - rcur));
      rcur = ri;
      si = s;
    }
    prof.phi[i] = si[0];
    prof.dphi[i] = si[1];
    prof.d2phi[i] = ri > 0.0 ? -si[1] / ri - std::pow(std::max(si[0], 0.0), p) : -0.5 * std::pow(a, p);
    dt = 1.0 / n;
  }
  prof.phi[0] = a;
  prof.dphi[0] = 0.0;
  prof.phi[n] = 0.0;
  prof.d2phi[n] = -prof.dphi[n];
  prof.finalize();
  for (int i = 0; i < n; ++i) {
    if (!(prof.phi[i] > 0.0) || (i > 0 && !(prof.dphi[i] < 0.0))) throw NumericalError("compute_profile: profile not monotone");
  }
  return prof;
}

namespace {

template <int N>
std::pair<double, double> disk_integrals(const RadialProfile& prof) {
  double ip = 0.0, ip1 = 0.0;
  for (size_t i = 0; i + 1 < prof.r.size(); ++i) {
    ip += boost::math::quadrature::gauss<double, N>::integrate(
        [&](double rr) { return std::pow(std::max(prof.value(rr), 0.0), prof.p) * rr; }, prof.r[i], prof.r[i + 1]);
    ip1 += boost::math::quadrature::gauss<double, N>::integrate(
        [&](double rr) { return std::pow(std::max(prof.value(rr), 0.0), prof.p + 1.0) * rr; }, prof.r[i],
        prof.r[i + 1]);
  }
  return {2.0 * kPi * ip, 2.0 * kPi * ip1};
}

}  // namespace

PohozaevResidual pohozaev_check(const RadialProfile& profile, int order) {
  std::pair<double, double> ints;
  switch (order) {
    case 7: ints = disk_integrals<7>(profile); break;
    case 15: ints = disk_integrals<15>(profile); break;
    case 30: ints = disk_integrals<30>(profile); break;
    default: throw std::invalid_argument("pohozaev_check: order must be 7, 15 or 30");
  }
  PohozaevResidual res;
  res.int_p = ints.first;
  res.int_p1 = ints.second;
  const double s = std::fabs(profile.dphi1);
  const double t1 = kPi * (profile.p + 1.0) / 2.0 * s * s;
  const double t2 = 2.0 * kPi * s;
  res.res1 = std::fabs(res.int_p1 - t1) / t1;
  res.res2 = std::fabs(res.int_p - t2) / t2;
  return res;
}

double core_scale_delta_max(double qhat, const RadialProfile& profile) {
  const double beta = 2.0 / (profile.p - 1.0);
  return std::exp(-1.0) * std::pow(qhat / std::fabs(profile.dphi1), 1.0 / beta);
}

CoreScale solve_core_scale(double delta, double qhat, const RadialProfile& profile) {
  if (!(delta > 0.0) || !(qhat > 0.0)) throw std::invalid_argument("solve_core_scale: delta and qhat must be > 0");
  const double beta = 2.0 / (profile.p - 1.0);
  const double g = std::fabs(profile.dphi1);
  // with t = -ln s: ln qhat - ln|phi'(1)| - beta ln delta - ln t - beta t = 0, decreasing in t
  const double c = std::log(qhat) - std::log(g) - beta * std::log(delta);
  auto h = [&](double t) { return c - std::log(t) - beta * t; };
  double lo = 1.0;
  if (!(h(lo) > 0.0)) {
    std::ostringstream os;
    os << "solve_core_scale: no root with s < 1/e for delta = " << delta << " (need delta < "
       << core_scale_delta_max(qhat, profile) << "); use a smaller delta";
    throw NumericalError(os.str());
  }
  double hi = lo + h(lo) / beta + 1.0;
  while (h(hi) > 0.0) hi *= 2.0;
  for (int it = 0; it < 400 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) > 0.0 ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  CoreScale cs;
  cs.delta = delta;
  cs.qhat = qhat;
  cs.s = std::exp(-t);
  const double lhs = std::pow(delta / cs.s, beta) * profile.dphi1;
  const double rhs = qhat / std::log(cs.s);
  cs.residual = std::fabs(lhs - rhs) / std::fabs(rhs);
  cs.ratio = cs.s / (delta * std::pow(std::fabs(std::log(delta)), 0.5 * (profile.p - 1.0)));
  return cs;
}

double ExtendedProfile::operator()(double r) const {
  if (r <= 1.0) return profile_.value(r);
  return profile_.dphi1 * std::log(r);
}

double ExtendedProfile::derivative(double r) const {
  if (r <= 1.0) return profile_.derivative(r);
  return profile_.dphi1 / r;
}

ExtendedProfile extended_profile(const RadialProfile& profile) { return ExtendedProfile(profile); }

}  // namespace vclust
