#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles/disk_oracle.hpp"
#include "vclust/error.hpp"
#include "vclust/reduce.hpp"

using namespace vclust;

namespace {

const RadialProfile& profile2() {
  static const RadialProfile p = compute_profile(2.0);
  return p;
}

// Displayed reduced energy for K = Id on the unit disk written out directly.
double identity_energy(const std::vector<Vec2>& z, double eps, double p, const std::function<double(Vec2)>& q) {
  const double d = eps * std::pow(-std::log(eps), -(p - 1) / 2), L = -std::log(eps);
  double e = 0.0;
  for (size_t j = 0; j < z.size(); ++j) {
    const double qj = q(z[j]);
    e += M_PI * d * d / L * qj * qj + (p - 1) * M_PI * d * d / (4 * L * L) * qj * qj;
    e -= 2 * M_PI * M_PI * d * d * qj * qj / (L * L) * oracle::disk_robin(z[j][0], z[j][1]);
    for (size_t i = 0; i < z.size(); ++i) {
      if (i == j) continue;
      e -= 2 * M_PI * M_PI * d * d * q(z[i]) * qj / (L * L) * oracle::disk_green(z[i][0], z[i][1], z[j][0], z[j][1]);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("admissibility") {
  const double eps = 0.01;
  auto one = make_cluster(eps, 2.0, {Vec2(0.3, 0.0)}, Vec2(0.3, 0.0), 0.4);
  CHECK(is_admissible(one).ok);
  auto same = make_cluster(eps, 2.0, {Vec2(0.3, 0.0), Vec2(0.3, 0.0)}, Vec2(0.3, 0.0), 0.4);
  CHECK_FALSE(is_admissible(same).ok);
  const double sep = std::pow(std::log(1 / eps), -5.0);
  auto pair = make_cluster(eps, 2.0, {Vec2(0.3, 0.0), Vec2(0.3 + 2 * sep, 0.0)}, Vec2(0.3, 0.0), 0.4);
  CHECK(is_admissible(pair).ok);
  auto far = make_cluster(eps, 2.0, {Vec2(0.75, 0.0)}, Vec2(0.3, 0.0), 0.4);
  const auto rep = is_admissible(far);
  CHECK_FALSE(rep.ok);
  CHECK(rep.violations.size() == 1);
}

TEST_CASE("reduced energy closed forms") {
  const auto f = identity_field(Disk{1.0}, QuadraticQ{1.0, Vec2::Zero(), 0.0});
  const DiskImageGreen img;
  for (double p : {2.0, 3.0}) {
    auto c = make_cluster(0.01, p, {Vec2::Zero()}, Vec2::Zero(), 0.5);
    const auto t = reduced_energy(f, c, img);
    const double d = c.delta, L = std::log(100.0);
    CHECK(t.total == doctest::Approx(kPi * d * d / L + (p - 1) * kPi * d * d / (4 * L * L)).epsilon(1e-14));
    CHECK(t.robin == 0.0);
    CHECK(t.interaction == 0.0);
  }
  const Vec2 x0(0.3, 0.0);
  const auto g = identity_field(Disk{1.0}, QuadraticQ{2.0, x0, 1.0});
  std::vector<Vec2> z{Vec2(0.1, 0.05), Vec2(0.45, -0.1), Vec2(0.3, 0.2)};
  auto c = make_cluster(0.001, 2.0, z, x0, 0.4);
  const auto t = reduced_energy(g, c, img);
  CHECK(t.total == doctest::Approx(t.leading + t.self + t.robin + t.interaction).epsilon(1e-15));
  CHECK(t.total == doctest::Approx(identity_energy(z, 0.001, 2.0, g.q)).epsilon(1e-12));
  CHECK(t.interaction <= 0.0);
  CHECK(t.error_budget > 0.0);

  auto swapped = c;
  std::swap(swapped.centers[0], swapped.centers[2]);
  const auto ts = reduced_energy(g, swapped, img);
  CHECK(ts.leading == doctest::Approx(t.leading).epsilon(1e-14));
  CHECK(ts.robin == doctest::Approx(t.robin).epsilon(1e-14));
  CHECK(ts.interaction == doctest::Approx(t.interaction).epsilon(1e-14));

  auto doubled = c;
  doubled.delta *= 2.0;
  CHECK(reduced_energy(g, doubled, img).total == doctest::Approx(4.0 * t.total).epsilon(1e-14));

  auto bad = make_cluster(0.001, 2.0, {Vec2(0.9, 0.0)}, x0, 0.4);
  CHECK_THROWS_AS(reduced_energy(g, bad, img), std::invalid_argument);
  CHECK_THROWS_AS(reduced_energy(g, c, img, EnergyForm::Expansion), std::invalid_argument);
  solve_amplitudes(g, c, profile2(), img);
  const auto te = reduced_energy(g, c, img, EnergyForm::Expansion);
  CHECK(te.total == doctest::Approx(te.leading + te.self + te.robin + te.interaction).epsilon(1e-15));
  CHECK(te.leading == doctest::Approx(t.leading).epsilon(0.3));
}

TEST_CASE("polygon seeds") {
  const Vec2 x0(0.3, 0.0);
  const double eps = 0.01, r = 1 / std::sqrt(std::log(100.0));
  const auto one = polygon_seed(x0, 1, eps, AngleConvention::TwoPi, 0.6);
  CHECK((one[0] - x0).norm() == doctest::Approx(r).epsilon(1e-14));
  const auto sq = polygon_seed(x0, 4, eps, AngleConvention::TwoPi, 0.6);
  std::vector<double> d;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) d.push_back((sq[i] - sq[j]).norm());
  std::sort(d.begin(), d.end());
  for (int k = 0; k < 4; ++k) CHECK(d[k] == doctest::Approx(r * std::sqrt(2.0)).epsilon(1e-12));
  for (int k = 4; k < 6; ++k) CHECK(d[k] == doctest::Approx(2 * r).epsilon(1e-12));
  const auto half = polygon_seed(x0, 4, eps, AngleConvention::Pi, 0.6);
  CHECK((half[2] - x0).normalized()[1] == doctest::Approx(1.0).epsilon(1e-12));
  for (double e : {1e-2, 1e-3, 1e-4, 1e-6})
    for (int m = 1; m <= 5; ++m)
      for (auto conv : {AngleConvention::Pi, AngleConvention::TwoPi}) {
        auto c = make_cluster(e, 2.0, polygon_seed(x0, m, e, conv, 0.7), x0, 0.7);
        CHECK(is_admissible(c).ok);
      }
  CHECK_THROWS_AS(polygon_seed(x0, 2, eps, AngleConvention::TwoPi, 0.3), std::invalid_argument);
}

namespace {

// Largest energy over configurations with the first seed point moved onto the sphere of radius rho.
double boundary_best(const CoefficientField& f, const GreenProvider& gp, const ClusterState& seed) {
  double worst = -1e300;
  for (int k = 0; k < 16; ++k) {
    auto c = seed;
    const double t = 2 * kPi * k / 16;
    c.centers[0] = seed.x0 + (1 - 1e-9) * seed.rho * Vec2(std::cos(t), std::sin(t));
    if (is_admissible(c).ok) worst = std::max(worst, reduced_energy(f, c, gp).total);
  }
  return worst;
}

}  // namespace

TEST_CASE("seed beats collision configurations") {
  const Vec2 x0(0.3, 0.0);
  const auto f = identity_field(Disk{1.0}, QuadraticQ{2.0, x0, 1.0});
  const DiskImageGreen img;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    for (int m : {2, 3}) {
      auto seed = make_cluster(eps, 2.0, polygon_seed(x0, m, eps, AngleConvention::TwoPi, 0.6), x0, 0.6);
      const double e0 = reduced_energy(f, seed, img).total;
      auto c = seed;
      const double sep = std::pow(std::log(1 / eps), -static_cast<double>(seed.exponent()));
      c.centers[1] = c.centers[0] + (1 + 1e-6) * sep * (x0 - c.centers[0]).normalized();
      CHECK(reduced_energy(f, c, img).total < e0);
    }
  }
}

TEST_CASE("boundary configurations lose to the seed as eps decreases") {
  const Vec2 x0(0.3, 0.0);
  const auto f = identity_field(Disk{1.0}, QuadraticQ{2.0, x0, 1.0});
  const DiskImageGreen img;
  for (int m : {2, 3}) {
    double prev = 1e300;
    for (double eps : {1e-2, 1e-4, 1e-8, 1e-16, 1e-32}) {
      auto seed = make_cluster(eps, 2.0, polygon_seed(x0, m, eps, AngleConvention::TwoPi, 0.6), x0, 0.6);
      const double ratio = boundary_best(f, img, seed) / reduced_energy(f, seed, img).total;
      CHECK(ratio < prev);
      prev = ratio;
    }
    CHECK(prev < 1.0);
  }
}

// Literal desk-scale statement; the exclusion is asymptotic and is violated at eps = 1e-2.
TEST_CASE("seed beats boundary configurations at desk eps" * doctest::may_fail()) {
  const Vec2 x0(0.3, 0.0);
  const auto f = identity_field(Disk{1.0}, QuadraticQ{2.0, x0, 1.0});
  const DiskImageGreen img;
  for (double eps : {1e-2, 1e-3, 1e-4}) {
    for (int m : {2, 3}) {
      auto seed = make_cluster(eps, 2.0, polygon_seed(x0, m, eps, AngleConvention::TwoPi, 0.6), x0, 0.6);
      CHECK(boundary_best(f, img, seed) < reduced_energy(f, seed, img).total);
    }
  }
}

TEST_CASE("landscape validation") {
  const auto f = identity_field(Disk{1.0}, QuadraticQ{2.0, Vec2(0.3, 0.0), 1.0});
  CHECK_NOTHROW(validate_landscape(f, Vec2(0.3, 0.0), 0.4));
  CHECK_THROWS_AS(validate_landscape(f, Vec2(0.1, 0.0), 0.4), std::invalid_argument);
  CHECK_THROWS_AS(validate_landscape(f, Vec2(0.3, 0.0), 0.8), std::invalid_argument);
}

TEST_CASE("maximize single center on the helical field") {
  HelicalParams hp;
  const auto f = helical_field(hp);
  const auto g = build_grid(f.domain, 1.0 / 64);
  const GreenCache cache(f, g, Vec2::Zero(), 0.5);
  const RotationReducedGreen greens(cache);
  const auto land = landscape(f, 128);
  const auto r = maximize(f, 1, 0.01, 2.0, Vec2::Zero(), 0.5, greens, profile2());
  CHECK((r.cluster.centers[0] - land.argmax).norm() <= 2 * land.dx);
  CHECK(r.cluster.qhat.size() == 1);
}

TEST_CASE("helical pair straddles the origin") {
  HelicalParams hp;
  const auto f = helical_field(hp);
  const auto g = build_grid(f.domain, 1.0 / 64);
  const GreenCache cache(f, g, Vec2::Zero(), 0.5);
  const RotationReducedGreen greens(cache);
  const double eps = 0.01;
  const auto r = maximize(f, 2, eps, 2.0, Vec2::Zero(), 0.5, greens, profile2());
  const Vec2 a = r.cluster.centers[0], b = r.cluster.centers[1];
  CHECK(a[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(a[0] > 0.0);
  CHECK(a.dot(b) < 0.0);

  // brute force over z1 = (u, 0), z2 = v (cos t, sin t)
  auto energy = [&](const Vec2& z1, const Vec2& z2) {
    auto c = make_cluster(eps, 2.0, {z1, z2}, Vec2::Zero(), 0.5);
    return is_admissible(c).ok ? reduced_energy(f, c, greens).total : -1e300;
  };
  double best = -1e300;
  Vec2 bz1, bz2;
  for (int iu = 1; iu < 25; ++iu)
    for (int iv = 1; iv < 25; ++iv)
      for (int it = 0; it < 36; ++it) {
        const Vec2 z1(0.02 * iu, 0.0), z2 = 0.02 * iv * Vec2(std::cos(it * kPi / 18), std::sin(it * kPi / 18));
        const double e = energy(z1, z2);
        if (e > best) {
          best = e;
          bz1 = z1;
          bz2 = z2;
        }
      }
  CHECK(bz1.dot(bz2) < 0.0);
  CHECK(r.terms.total >= best);
  CHECK((a - b).norm() == doctest::Approx((bz1 - bz2).norm()).epsilon(0.1));

  // rotating the maximizer leaves the energy unchanged
  for (double t : {0.3, 1.7, 4.0}) {
    auto c = r.cluster;
    for (auto& z : c.centers) z = rotation_cw(t) * z;
    CHECK(std::fabs(reduced_energy(f, c, greens).total - r.terms.total) <= 1e-10 * std::fabs(r.terms.total));
  }
}

TEST_CASE("maximize rejects a flat landscape") {
  const auto f = identity_field(Disk{1.0}, QuadraticQ{1.0, Vec2::Zero(), 0.0});
  CHECK_THROWS_AS(maximize(f, 2, 0.01, 2.0, Vec2::Zero(), 0.4, DiskImageGreen(), profile2()), std::invalid_argument);
}
