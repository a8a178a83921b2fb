#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "vclust/solve.hpp"

namespace vclust {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Sampler2D = std::function<double(const Vec2&)>;

/// H_rho(x) = (R_rho (x1, x2), x3 + k rho) with R_rho the clockwise rotation by rho.
Vec3 helical_map(double k, double rho, const Vec3& x);
/// R_rho acting on the first two components.
Mat3 rotation3(double rho);
/// zeta(x) = (x2, -x1, k).
Vec3 zeta(double k, const Vec3& x);

/// omega(x, t) = w(Rbar_{-alpha |ln eps| t} x); the support of w at z moves to Rbar_{alpha |ln eps| t} z.
Sampler2D rotate_solution(Sampler2D sampler, double t, double alpha, double eps);
/// Scalar vorticity (|ln eps| / delta^2)(v - q)_+^p with v interpolated bilinearly.
Sampler2D omega_sampler(const SolveResult& result, const CoefficientField& field);

/// Cylindrical lattice r_i = i dr (i = 0..nr), theta_j = j dtheta (j < ntheta), x3_l = l dz (l = 0..nz)
/// with dz = k dtheta, so that lattice shifts (j, l) -> (j + 1, l + 1) are helical motions.
struct CylLattice {
  double radius = 1.0;
  int nr = 64;
  int ntheta = 128;
  int nz = 128;
};

struct HelicalField3D {
  double k = 1.0;
  CylLattice lattice;
  Sampler2D omega2d;
  std::vector<double> omega;  // index (l * ntheta + j) * (nr + 1) + i

  double dr() const { return lattice.radius / lattice.nr; }
  double dtheta() const { return 2.0 * kPi / lattice.ntheta; }
  double dz() const { return k * dtheta(); }
  double omega_at(int i, int j, int l) const {
    return omega[(static_cast<size_t>(l) * lattice.ntheta + j) * (lattice.nr + 1) + i];
  }
  Vec3 node(int i, int j, int l) const;
  /// omega(x', x3) = omega2d(R_{-x3/k} x') evaluated directly.
  double omega_exact(const Vec3& x) const;
  Vec3 w_exact(const Vec3& x) const { return omega_exact(x) / k * zeta(k, x); }
  /// Trilinear interpolation in (r, theta, x3) of the lattice samples; x3 outside the sampled slab uses
  /// the helical periodicity of the lattice.
  double omega_interp(const Vec3& x) const;
  Vec3 w_interp(const Vec3& x) const { return omega_interp(x) / k * zeta(k, x); }
  double max_w() const;
};

HelicalField3D vorticity3d(Sampler2D omega2d, double k, const CylLattice& lattice);

/// Central-difference divergence of w at interior lattice nodes, in cylindrical form
/// (1/r) d_r(r w_r) + (1/r) d_theta w_theta + d_3 w_3. Returns the max |div|.
double lattice_divergence(const HelicalField3D& field);
/// Flux of w through x3 = 0 with the 2D grid quadrature h^2 sum over the unknowns.
double flux_z0(const HelicalField3D& field, const Grid2D& grid);

struct EquivarianceReport {
  double exact = 0.0;         // max |w(H x) - R w(x)| with the direct sampler
  double interpolated = 0.0;  // same with lattice interpolation
  double scale = 0.0;         // max |w| on the lattice
};
/// Compares w(H_rho x) with R_rho w(x) at n random (x, rho).
EquivarianceReport equivariance_check(const HelicalField3D& field, int n, unsigned seed);

struct TubeMesh {
  std::vector<Vec3> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Vec3> centerline;
};

/// Boundary polygon of a support component: rays from the center, level set v = q located by bisection.
std::vector<Vec2> component_contour(const Grid2D& grid, const CoefficientField& field, const Vector& v,
                                    const SupportComponent& component, int rays = 48);
/// Sweeps each contour by H_rho, rho in [0, 2 pi turns], turns * samples_per_turn + 1 rings.
std::vector<TubeMesh> tube_geometry(const std::vector<std::vector<Vec2>>& contours, const std::vector<Vec2>& centers,
                                    double k, int turns, int samples_per_turn);
std::vector<TubeMesh> tube_geometry(const SolveResult& result, const CoefficientField& field, double k, int turns,
                                    int samples_per_turn, int rays = 48);

/// VTK legacy ASCII POLYDATA (triangles and centerline polylines). Throws IoError.
void write_vtk_tubes(const std::string& path, const std::vector<TubeMesh>& tubes);
/// Cartesian resampling of w on an n x n x nz box over [-R, R]^2 x [0, 2 pi k turns].
struct BoxSampling {
  int n = 32;
  int nz = 32;
  int turns = 1;
};
/// VTK legacy ASCII STRUCTURED_POINTS with vectors w and scalars omega. Throws IoError.
void write_vtk_field(const std::string& path, const HelicalField3D& field, const BoxSampling& box);
/// x1,x2,x3,omega,w1,w2,w3 per lattice node in (l, j, i) order, 17 significant digits. Throws IoError.
void write_field3d_csv(const std::string& path, const HelicalField3D& field);
std::vector<std::array<double, 7>> read_field3d_csv(const std::string& path);
/// Tubes as JSON: per tube points, triangles and centerline.
void write_tubes_json(const std::string& path, const std::vector<TubeMesh>& tubes);

}  // namespace vclust
