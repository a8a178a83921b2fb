#include "vclust/helix.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"
#include "vclust/error.hpp"

namespace vclust {

Vec3 helical_map(double k, double rho, const Vec3& x) {
  const Vec2 y = rotation_cw(rho) * Vec2(x[0], x[1]);
  return Vec3(y[0], y[1], x[2] + k * rho);
}

Mat3 rotation3(double rho) {
  Mat3 r = Mat3::Identity();
  r.topLeftCorner<2, 2>() = rotation_cw(rho);
  return r;
}

Vec3 zeta(double k, const Vec3& x) { return Vec3(x[1], -x[0], k); }

Sampler2D rotate_solution(Sampler2D sampler, double t, double alpha, double eps) {
  const Mat2 R = rotation_cw(-alpha * std::fabs(std::log(eps)) * t);
  return [sampler = std::move(sampler), R](const Vec2& x) { return sampler(R * x); };
}

Sampler2D omega_sampler(const SolveResult& result, const CoefficientField& field) {
  const double scale = std::fabs(std::log(result.eps)) / (result.delta * result.delta);
  return [grid = result.grid, v = result.v, q = field.q, p = result.p, scale](const Vec2& x) {
    if (!contains_strict(grid->domain, x)) return 0.0;
    const double d = interpolate(*grid, v, x) - q(x);
    return d > 0.0 ? scale * std::pow(d, p) : 0.0;
  };
}

Vec3 HelicalField3D::node(int i, int j, int l) const {
  const double r = i * dr(), t = j * dtheta();
  return Vec3(r * std::cos(t), r * std::sin(t), l * dz());
}

double HelicalField3D::omega_exact(const Vec3& x) const {
  return omega2d(rotation_cw(-x[2] / k) * Vec2(x[0], x[1]));
}

double HelicalField3D::omega_interp(const Vec3& x) const {
  const int nr = lattice.nr, nt = lattice.ntheta, nz = lattice.nz;
  const double r = std::hypot(x[0], x[1]);
  if (r > lattice.radius) return 0.0;
  double theta = std::atan2(x[1], x[0]);
  double x3 = x[2];
  // move x3 into the sampled slab along the helical symmetry
  const long l0 = static_cast<long>(std::floor(x3 / dz()));
  const long shift = l0 - std::clamp<long>(l0, 0, nz - 1);
  x3 -= shift * dz();
  theta += shift * dtheta();
  const double fr = r / dr(), ft = theta / dtheta(), fz = x3 / dz();
  const int i = std::min(static_cast<int>(std::floor(fr)), nr - 1);
  const long jj = static_cast<long>(std::floor(ft));
  const int l = std::clamp(static_cast<int>(std::floor(fz)), 0, nz - 1);
  const double a = fr - i, b = ft - jj, c = fz - l;
  auto wrap = [nt](long j) { return static_cast<int>(((j % nt) + nt) % nt); };
  const int j0 = wrap(jj), j1 = wrap(jj + 1);
  double s = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dl = 0; dl < 2; ++dl) {
        const double w = (di ? a : 1 - a) * (dj ? b : 1 - b) * (dl ? c : 1 - c);
        if (w != 0.0) s += w * omega_at(i + di, dj ? j1 : j0, l + dl);
      }
  return s;
}

double HelicalField3D::max_w() const {
  double m = 0.0;
  for (int l = 0; l <= lattice.nz; ++l)
    for (int j = 0; j < lattice.ntheta; ++j)
      for (int i = 0; i <= lattice.nr; ++i) m = std::max(m, std::fabs(omega_at(i, j, l)) / k * zeta(k, node(i, j, l)).norm());
  return m;
}

HelicalField3D vorticity3d(Sampler2D omega2d, double k, const CylLattice& lattice) {
  if (!(k > 0.0)) throw std::invalid_argument("vorticity3d: pitch k must be positive");
  if (lattice.nr < 2 || lattice.ntheta < 4 || lattice.nz < 2 || !(lattice.radius > 0.0))
    throw std::invalid_argument("vorticity3d: lattice too small");
  HelicalField3D f;
  f.k = k;
  f.lattice = lattice;
  f.omega2d = std::move(omega2d);
  const int nr = lattice.nr, nt = lattice.ntheta, nz = lattice.nz;
  f.omega.assign(static_cast<size_t>(nz + 1) * nt * (nr + 1), 0.0);
#pragma omp parallel for schedule(static)
  for (int l = 0; l <= nz; ++l)
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i <= nr; ++i)
        f.omega[(static_cast<size_t>(l) * nt + j) * (nr + 1) + i] = f.omega_exact(f.node(i, j, l));
  return f;
}

double lattice_divergence(const HelicalField3D& f) {
  const int nr = f.lattice.nr, nt = f.lattice.ntheta, nz = f.lattice.nz;
  const double dr = f.dr(), dt = f.dtheta(), dz = f.dz();
  // cylindrical components from the Cartesian vector at a node
  auto comps = [&](int i, int j, int l) {
    const Vec3 x = f.node(i, j, l);
    const Vec3 w = f.omega_at(i, j, l) / f.k * zeta(f.k, x);
    const double t = j * dt;
    return Vec3(w[0] * std::cos(t) + w[1] * std::sin(t), -w[0] * std::sin(t) + w[1] * std::cos(t), w[2]);
  };
  double worst = 0.0;
  for (int l = 1; l < nz; ++l)
    for (int j = 0; j < nt; ++j)
      for (int i = 1; i < nr; ++i) {
        const double r = i * dr;
        const int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
        const double drr = ((r + dr) * comps(i + 1, j, l)[0] - (r - dr) * comps(i - 1, j, l)[0]) / (2 * dr) / r;
        const double dth = (comps(i, jp, l)[1] - comps(i, jm, l)[1]) / (2 * dt) / r;
        const double d3 = (comps(i, j, l + 1)[2] - comps(i, j, l - 1)[2]) / (2 * dz);
        worst = std::max(worst, std::fabs(drr + dth + d3));
      }
  return worst;
}

double flux_z0(const HelicalField3D& f, const Grid2D& grid) {
  double s = 0.0;
  for (int u = 0; u < grid.size(); ++u) {
    const Vec2 x = grid.unknown_point(u);
    s += f.w_exact(Vec3(x[0], x[1], 0.0))[2];
  }
  return s * grid.h * grid.h;
}

EquivarianceReport equivariance_check(const HelicalField3D& f, int n, unsigned seed) {
  EquivarianceReport rep;
  rep.scale = f.max_w();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, f.lattice.radius), ut(0.0, 2 * kPi), uz(0.0, f.lattice.nz * f.dz());
  for (int s = 0; s < n; ++s) {
    const double r = ur(rng), t = ut(rng);
    const Vec3 x(r * std::cos(t), r * std::sin(t), uz(rng));
    const double rho = ut(rng);
    const Vec3 hx = helical_map(f.k, rho, x);
    const Mat3 R = rotation3(rho);
    rep.exact = std::max(rep.exact, (f.w_exact(hx) - R * f.w_exact(x)).norm());
    rep.interpolated = std::max(rep.interpolated, (f.w_interp(hx) - R * f.w_interp(x)).norm());
  }
  return rep;
}

std::vector<Vec2> component_contour(const Grid2D& grid, const CoefficientField& field, const Vector& v,
                                    const SupportComponent& comp, int rays) {
  std::vector<Vec2> out;
  if (comp.unknowns.empty()) return out;
  auto level = [&](const Vec2& x) { return interpolate(grid, v, x) - field.q(x); };
  const Vec2 c = comp.center;
  const double reach = comp.enclosing_radius + 2.0 * grid.h;
  for (int a = 0; a < rays; ++a) {
    const double t = 2.0 * kPi * a / rays;
    const Vec2 d(std::cos(t), std::sin(t));
    double lo = 0.0, hi = 0.0;
    for (double s = 0.25 * grid.h; s <= reach; s += 0.25 * grid.h) {
      if (!(level(c + s * d) > 0.0)) {
        hi = s;
        break;
      }
      lo = s;
    }
    if (hi == 0.0) hi = reach;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (level(c + mid * d) > 0.0 ? lo : hi) = mid;
    }
    out.push_back(c + 0.5 * (lo + hi) * d);
  }
  return out;
}

std::vector<TubeMesh> tube_geometry(const std::vector<std::vector<Vec2>>& contours, const std::vector<Vec2>& centers,
                                    double k, int turns, int samples_per_turn) {
  if (!(k > 0.0) || turns < 1 || samples_per_turn < 3) throw std::invalid_argument("tube_geometry: bad sweep parameters");
  if (contours.size() != centers.size()) throw std::invalid_argument("tube_geometry: one center per contour");
  const int rings = turns * samples_per_turn + 1;
  std::vector<TubeMesh> tubes(contours.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (int c = 0; c < static_cast<int>(contours.size()); ++c) {
    TubeMesh& t = tubes[c];
    const auto& poly = contours[c];
    const int n = static_cast<int>(poly.size());
    for (int r = 0; r < rings; ++r) {
      const double rho = 2.0 * kPi * r / samples_per_turn;
      for (const auto& p : poly) t.points.push_back(helical_map(k, rho, Vec3(p[0], p[1], 0.0)));
      t.centerline.push_back(helical_map(k, rho, Vec3(centers[c][0], centers[c][1], 0.0)));
    }
    for (int r = 0; r + 1 < rings && n > 1; ++r)
      for (int a = 0; a < n; ++a) {
        const int b = (a + 1) % n;
        const int p0 = r * n + a, p1 = r * n + b, p2 = (r + 1) * n + a, p3 = (r + 1) * n + b;
        t.triangles.push_back({p0, p1, p3});
        t.triangles.push_back({p0, p3, p2});
      }
  }
  return tubes;
}

std::vector<TubeMesh> tube_geometry(const SolveResult& result, const CoefficientField& field, double k, int turns,
                                    int samples_per_turn, int rays) {
  std::vector<std::vector<Vec2>> contours;
  std::vector<Vec2> centers;
  for (const auto& c : result.components) {
    contours.push_back(component_contour(*result.grid, field, result.v, c, rays));
    centers.push_back(c.center);
  }
  return tube_geometry(contours, centers, k, turns, samples_per_turn);
}

namespace {

std::FILE* open_out(const std::string& path) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  return fp;
}

void close_out(std::FILE* fp, const std::string& path) {
  if (std::ferror(fp) || std::fclose(fp) != 0) throw IoError("cannot write " + path + ": " + std::strerror(errno));
}

}  // namespace

void write_vtk_tubes(const std::string& path, const std::vector<TubeMesh>& tubes) {
  std::FILE* fp = open_out(path);
  size_t npts = 0, ntri = 0, nlines = 0, nline_pts = 0;
  for (const auto& t : tubes) {
    npts += t.points.size() + t.centerline.size();
    ntri += t.triangles.size();
    if (!t.centerline.empty()) {
      ++nlines;
      nline_pts += t.centerline.size();
    }
  }
  std::fprintf(fp, "# vtk DataFile Version 3.0\nhelical tubes\nASCII\nDATASET POLYDATA\nPOINTS %zu double\n", npts);
  for (const auto& t : tubes) {
    for (const auto& p : t.points) std::fprintf(fp, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
    for (const auto& p : t.centerline) std::fprintf(fp, "%.17g %.17g %.17g\n", p[0], p[1], p[2]);
  }
  if (ntri > 0) {
    std::fprintf(fp, "POLYGONS %zu %zu\n", ntri, 4 * ntri);
    size_t base = 0;
    for (const auto& t : tubes) {
      for (const auto& tri : t.triangles)
        std::fprintf(fp, "3 %zu %zu %zu\n", base + tri[0], base + tri[1], base + tri[2]);
      base += t.points.size() + t.centerline.size();
    }
  }
  if (nlines > 0) {
    std::fprintf(fp, "LINES %zu %zu\n", nlines, nlines + nline_pts);
    size_t base = 0;
    for (const auto& t : tubes) {
      base += t.points.size();
      if (!t.centerline.empty()) {
        std::fprintf(fp, "%zu", t.centerline.size());
        for (size_t i = 0; i < t.centerline.size(); ++i) std::fprintf(fp, " %zu", base + i);
        std::fprintf(fp, "\n");
      }
      base += t.centerline.size();
    }
  }
  close_out(fp, path);
}

void write_vtk_field(const std::string& path, const HelicalField3D& f, const BoxSampling& box) {
  if (box.n < 2 || box.nz < 2 || box.turns < 1) throw std::invalid_argument("write_vtk_field: box too small");
  const double R = f.lattice.radius, height = 2.0 * kPi * f.k * box.turns;
  const double sx = 2.0 * R / (box.n - 1), sz = height / (box.nz - 1);
  const size_t total = static_cast<size_t>(box.n) * box.n * box.nz;
  std::vector<double> om(total);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < box.nz; ++l)
    for (int j = 0; j < box.n; ++j)
      for (int i = 0; i < box.n; ++i) {
        const Vec3 x(-R + i * sx, -R + j * sx, l * sz);
        om[(static_cast<size_t>(l) * box.n + j) * box.n + i] = std::hypot(x[0], x[1]) < R ? f.omega_exact(x) : 0.0;
      }
  std::FILE* fp = open_out(path);
  std::fprintf(fp, "# vtk DataFile Version 3.0\nhelical vorticity\nASCII\nDATASET STRUCTURED_POINTS\n");
  std::fprintf(fp, "DIMENSIONS %d %d %d\nORIGIN %.17g %.17g 0\nSPACING %.17g %.17g %.17g\n", box.n, box.n, box.nz, -R, -R,
               sx, sx, sz);
  std::fprintf(fp, "POINT_DATA %zu\nSCALARS omega double 1\nLOOKUP_TABLE default\n", total);
  for (double v : om) std::fprintf(fp, "%.17g\n", v);
  std::fprintf(fp, "VECTORS w double\n");
  for (int l = 0; l < box.nz; ++l)
    for (int j = 0; j < box.n; ++j)
      for (int i = 0; i < box.n; ++i) {
        const Vec3 x(-R + i * sx, -R + j * sx, l * sz);
        const Vec3 w = om[(static_cast<size_t>(l) * box.n + j) * box.n + i] / f.k * zeta(f.k, x);
        std::fprintf(fp, "%.17g %.17g %.17g\n", w[0], w[1], w[2]);
      }
  close_out(fp, path);
}

void write_field3d_csv(const std::string& path, const HelicalField3D& f) {
  std::FILE* fp = open_out(path);
  std::fprintf(fp, "x1,x2,x3,omega,w1,w2,w3\n");
  for (int l = 0; l <= f.lattice.nz; ++l)
    for (int j = 0; j < f.lattice.ntheta; ++j)
      for (int i = 0; i <= f.lattice.nr; ++i) {
        const Vec3 x = f.node(i, j, l);
        const double om = f.omega_at(i, j, l);
        const Vec3 w = om / f.k * zeta(f.k, x);
        std::fprintf(fp, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", x[0], x[1], x[2], om, w[0], w[1], w[2]);
      }
  close_out(fp, path);
}

std::vector<std::array<double, 7>> read_field3d_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::string line;
  std::getline(in, line);
  std::vector<std::array<double, 7>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 7> r{};
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf", &r[0], &r[1], &r[2], &r[3], &r[4], &r[5], &r[6]) != 7)
      throw IoError("malformed row in " + path);
    rows.push_back(r);
  }
  return rows;
}

void write_tubes_json(const std::string& path, const std::vector<TubeMesh>& tubes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : tubes) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& p : t.points) j["points"].push_back({p[0], p[1], p[2]});
    j["triangles"] = t.triangles;
    j["centerline"] = nlohmann::json::array();
    for (const auto& p : t.centerline) j["centerline"].push_back({p[0], p[1], p[2]});
    out.push_back(j);
  }
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  os << out.dump(1) << '\n';
  if (!os) throw IoError("cannot write " + path);
}

}  // namespace vclust
