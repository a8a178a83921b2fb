#include "vclust/reduce.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "vclust/error.hpp"

namespace vclust {

AdmissibilityReport is_admissible(const ClusterState& c) {
  AdmissibilityReport rep;
  const double sep = std::pow(std::fabs(std::log(c.eps)), -static_cast<double>(c.exponent()));
  for (int i = 0; i < c.m(); ++i) {
    const double d = (c.centers[i] - c.x0).norm();
    if (!(d < c.rho)) {
      std::ostringstream os;
      os << "z_" << i << " at distance " << d << " from x0 is outside B_rho (rho = " << c.rho << ")";
      rep.violations.push_back(os.str());
    }
  }
  for (int i = 0; i < c.m(); ++i) {
    for (int j = i + 1; j < c.m(); ++j) {
      const double d = (c.centers[i] - c.centers[j]).norm();
      if (!(d >= sep)) {
        std::ostringstream os;
        os << "|z_" << i << " - z_" << j << "| = " << d << " < |ln eps|^-M = " << sep;
        rep.violations.push_back(os.str());
      }
    }
  }
  rep.ok = rep.violations.empty();
  return rep;
}

ReducedEnergyTerms reduced_energy(const CoefficientField& field, const ClusterState& c, const GreenProvider& greens,
                                  EnergyForm form) {
  const auto adm = is_admissible(c);
  if (!adm.ok) throw std::invalid_argument("reduced_energy: inadmissible cluster: " + adm.violations.front());
  const int m = c.m();
  const double d2 = c.delta * c.delta;
  const double L = std::log(1.0 / c.eps);
  const double pi = kPi;
  ReducedEnergyTerms t;
  std::vector<double> w(m), sq(m), lg(m);
  if (form == EnergyForm::Displayed) {
    for (int j = 0; j < m; ++j) {
      w[j] = field.q(c.centers[j]);
      lg[j] = L;
    }
  } else {
    if (static_cast<int>(c.qhat.size()) != m || static_cast<int>(c.s.size()) != m)
      throw std::invalid_argument("reduced_energy: expansion form needs solved amplitudes");
    for (int j = 0; j < m; ++j) {
      w[j] = c.qhat[j];
      lg[j] = std::log(1.0 / c.s[j]);
    }
  }
  for (int j = 0; j < m; ++j) sq[j] = std::sqrt(field.det_K(c.centers[j]));
  // The expansion form carries + signs on the Green terms; the displayed form carries - signs.
  const double sign = form == EnergyForm::Displayed ? -1.0 : 1.0;
  for (int j = 0; j < m; ++j) {
    const double a = w[j] * w[j] * sq[j];
    t.leading += pi * d2 / lg[j] * a;
    t.self += (c.p - 1.0) * pi * d2 / (4.0 * lg[j] * lg[j]) * a;
    t.robin += sign * 2.0 * pi * pi * d2 * w[j] * w[j] * sq[j] * sq[j] / (lg[j] * lg[j]) * greens.robin(c.centers[j]);
  }
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      t.interaction += sign * 2.0 * pi * pi * d2 * w[i] * w[j] * sq[i] * sq[j] / (lg[i] * lg[j]) *
                       greens.green(c.centers[i], c.centers[j]);
    }
  }
  t.total = t.leading + t.self + t.robin + t.interaction;
  const double ll = std::log(L);
  t.error_budget = d2 * ll * ll / (L * L * L);
  return t;
}

std::vector<Vec2> polygon_seed(const Vec2& x0, int m, double eps, AngleConvention convention, double rho,
                               double scale) {
  if (m < 1) throw std::invalid_argument("polygon_seed: m must be at least 1");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("polygon_seed: eps must lie in (0, 1)");
  const double r = scale / std::sqrt(std::fabs(std::log(eps)));
  if (!(r < rho)) {
    std::ostringstream os;
    os << "polygon seed radius " << r << " leaves B_rho(x0) with rho = " << rho << "; use a larger rho or a larger eps";
    throw std::invalid_argument(os.str());
  }
  const double step = (convention == AngleConvention::Pi ? kPi : 2.0 * kPi) / m;
  std::vector<Vec2> z(m);
  for (int j = 0; j < m; ++j) z[j] = x0 + r * Vec2(std::cos(j * step), std::sin(j * step));
  return z;
}

void validate_landscape(const CoefficientField& field, const Vec2& x0, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  if (!(distance_to_boundary(field.domain, x0) > rho))
    throw std::invalid_argument("B_rho(x0) is not compactly contained in the domain");
  const double peak = field.landscape_value(x0);
  const int nr = 24, nt = 48;
  for (int a = 1; a <= nr; ++a) {
    const double r = rho * a / nr;
    for (int b = 0; b < nt; ++b) {
      const double t = 2.0 * kPi * b / nt;
      const Vec2 x = x0 + r * Vec2(std::cos(t), std::sin(t));
      if (!(field.landscape_value(x) < peak)) {
        std::ostringstream os;
        os << "q^2 sqrt(det K) does not have a strict maximum at x0 within B_rho: value at (" << x[0] << ", " << x[1]
           << ") is not below the value at x0";
        throw std::invalid_argument(os.str());
      }
    }
  }
}

namespace {

struct Objective {
  const CoefficientField* field;
  const GreenProvider* greens;
  const RadialProfile* profile;
  ClusterState base;
  EnergyForm form;
  double unit;  // delta^2 / |ln eps|

  double operator()(const double* x) const {
    ClusterState c = base;
    for (int j = 0; j < c.m(); ++j) c.centers[j] = Vec2(x[2 * j], x[2 * j + 1]);
    if (!is_admissible(c).ok) return std::numeric_limits<double>::infinity();
    if (form == EnergyForm::Expansion) {
      try {
        solve_amplitudes(*field, c, *profile, *greens);
      } catch (const NumericalError&) {
        return std::numeric_limits<double>::infinity();
      }
    }
    return -reduced_energy(*field, c, *greens, form).total / unit;
  }
};

double gsl_objective(const gsl_vector* v, void* params) {
  const auto* obj = static_cast<const Objective*>(params);
  const double val = (*obj)(v->data);
  return std::isfinite(val) ? val : 1e100;
}

// Nelder-Mead from z with initial step; returns the best value and overwrites z.
double nelder_mead(const Objective& obj, std::vector<double>& z, double step, double size_tol, int max_iter) {
  const size_t n = z.size();
  gsl_multimin_function fn{&gsl_objective, n, const_cast<Objective*>(&obj)};
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* ss = gsl_vector_alloc(n);
  for (size_t i = 0; i < n; ++i) gsl_vector_set(x, i, z[i]);
  gsl_vector_set_all(ss, step);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), size_tol) == GSL_SUCCESS) break;
  }
  const double best = s->fval;
  for (size_t i = 0; i < n; ++i) z[i] = gsl_vector_get(s->x, i);
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return best;
}

}  // namespace

MaximizeResult maximize(const CoefficientField& field, int m, double eps, double p, const Vec2& x0, double rho,
                        const GreenProvider& greens, const RadialProfile& profile, const MaximizeOptions& opts) {
  if (m < 1) throw std::invalid_argument("maximize: m must be at least 1");
  validate_landscape(field, x0, rho);
  gsl_set_error_handler_off();

  Objective obj{&field, &greens, &profile, make_cluster(eps, p, std::vector<Vec2>(m, x0), x0, rho), opts.form, 0.0};
  obj.unit = obj.base.delta * obj.base.delta / std::fabs(std::log(eps));
  const double r0 = 1.0 / std::sqrt(std::fabs(std::log(eps)));

  // polygon seeds at three radii, then random admissible configurations
  std::vector<std::vector<Vec2>> starts;
  for (double f : {0.5, 1.0, 1.5}) {
    const double scale = std::min(f, 0.9 * rho / r0);
    starts.push_back(polygon_seed(x0, m, eps, opts.convention, rho, scale));
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < opts.random_starts; ++k) {
    ClusterState c = obj.base;
    for (int tries = 0; tries < 1000; ++tries) {
      for (int j = 0; j < m; ++j) {
        const double r = 0.9 * rho * std::sqrt(uni(rng)), t = 2.0 * kPi * uni(rng);
        c.centers[j] = x0 + r * Vec2(std::cos(t), std::sin(t));
      }
      if (is_admissible(c).ok) break;
    }
    starts.push_back(c.centers);
  }

  const int ns = static_cast<int>(starts.size());
  std::vector<double> value(ns, std::numeric_limits<double>::infinity());
  std::vector<std::vector<double>> best(ns);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < ns; ++k) {
    std::vector<double> z(2 * m);
    for (int j = 0; j < m; ++j) {
      z[2 * j] = starts[k][j][0];
      z[2 * j + 1] = starts[k][j][1];
    }
    if (!std::isfinite(obj(z.data()))) continue;
    double step = 0.25 * std::min(r0, rho);
    double v = 0.0;
    // restarts shake Nelder-Mead out of collapsed simplices
    for (int round = 0; round < 3; ++round) {
      v = nelder_mead(obj, z, step, opts.size_tol * r0, opts.max_iter);
      step *= 0.1;
    }
    const double check = obj(z.data());
    if (std::isfinite(check)) {
      value[k] = v;
      best[k] = z;
    }
  }

  MaximizeResult res;
  res.start_values.resize(ns);
  for (int k = 0; k < ns; ++k) {
    res.start_values[k] = std::isfinite(value[k]) ? -value[k] * obj.unit : -std::numeric_limits<double>::infinity();
    if (std::isfinite(value[k]) && (res.best_start < 0 || value[k] < value[res.best_start])) res.best_start = k;
  }
  if (res.best_start < 0) throw NumericalError("maximize: every start was infeasible");

  ClusterState c = obj.base;
  for (int j = 0; j < m; ++j) c.centers[j] = Vec2(best[res.best_start][2 * j], best[res.best_start][2 * j + 1]);
  if (opts.canonical_rotation && field.rotation_invariant && x0.norm() == 0.0 && c.centers[0].norm() > 0.0) {
    const double t = std::atan2(c.centers[0][1], c.centers[0][0]);
    const Mat2 R = rotation_cw(t);
    for (auto& z : c.centers) z = R * z;
  }
  solve_amplitudes(field, c, profile, greens);
  res.terms = reduced_energy(field, c, greens, opts.form);
  res.cluster = c;
  return res;
}

}  // namespace vclust
