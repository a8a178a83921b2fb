#include "commands.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <gsl/gsl_version.h>
#include <iostream>
#include <memory>
#include <sstream>
#include <vector>

#include "vclust/error.hpp"
#include "vclust/helix.hpp"

namespace vclust::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

json to_json(const Vec2& x) { return json::array({x[0], x[1]}); }

json to_json(const std::vector<Vec2>& xs) {
  json j = json::array();
  for (const auto& x : xs) j.push_back(to_json(x));
  return j;
}

json versions() {
  return {{"vclust", kToolVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"gsl", GSL_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"compiler", __VERSION__},
#ifdef _OPENMP
          {"openmp", _OPENMP},
#endif
          {"cxx", __cplusplus}};
}

/// Output directory, stage timings and written files of one run.
class Run {
 public:
  Run(std::string command, const Config& cfg, std::string config_path)
      : command_(std::move(command)), cfg_(cfg), config_path_(std::move(config_path)) {}

  const Config& cfg() const { return cfg_; }

  void open() {
    dir_ = cfg_.text("out");
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_ + ": " + ec.message());
  }

  /// Best-effort open so that rejected configurations still leave a manifest.
  void try_open() noexcept {
    try {
      if (dir_.empty()) open();
    } catch (...) {
      dir_.clear();
    }
  }

  std::string path(const std::string& name) {
    outputs_.push_back(name);
    return (fs::path(dir_) / name).string();
  }

  template <class F>
  auto stage(const std::string& name, F&& fn) {
    stage_ = name;
    std::fprintf(stderr, "[%s] %s ...\n", command_.c_str(), name.c_str());
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      stages_.push_back({{"stage", name}, {"seconds", s}});
      std::fprintf(stderr, "[%s] %s done in %.3f s\n", command_.c_str(), name.c_str(), s);
    };
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      finish();
    } else {
      auto r = fn();
      finish();
      return r;
    }
  }

  void write_json(const std::string& name, const json& j) {
    const std::string p = path(name);
    std::ofstream os(p);
    if (!os) throw IoError("cannot open " + p + ": " + std::strerror(errno));
    os << j.dump(2) << '\n';
    if (!os) throw IoError("cannot write " + p);
  }

  /// Writes manifest.json; outputs of a failed run are labeled partial.
  void finish(int code, const std::string& message) {
    if (dir_.empty()) return;
    json m;
    m["command"] = command_;
    m["status"] = code == kOk ? "ok" : "failed";
    if (code != kOk) m["error"] = {{"stage", stage_}, {"message", message}, {"exit_code", code}};
    m["inputs"] = cfg_.resolved(command_);
    if (!config_path_.empty()) {
      json c = {{"path", config_path_}};
      try {
        c["sha256"] = sha256_file(config_path_);
      } catch (const IoError&) {
      }
      m["config_file"] = c;
    }
    try {
      m["seeds"] = {{"random_seed", cfg_.integer("random_seed")}};
    } catch (const ConfigError&) {
      m["seeds"] = {{"random_seed", nullptr}};
    }
    m["versions"] = versions();
    m["stages"] = stages_;
    json outs = json::array();
    for (const auto& name : outputs_) {
      const fs::path p = fs::path(dir_) / name;
      json o = {{"path", name}};
      std::error_code ec;
      if (fs::exists(p, ec)) {
        o["bytes"] = fs::file_size(p, ec);
        o["sha256"] = sha256_file(p.string());
      } else {
        o["missing"] = true;
      }
      if (code != kOk) o["partial"] = true;
      outs.push_back(o);
    }
    m["outputs"] = outs;
    std::ofstream os(fs::path(dir_) / "manifest.json");
    os << m.dump(2) << '\n';
    if (!os) throw IoError("cannot write manifest in " + dir_);
  }

 private:
  std::string command_;
  const Config& cfg_;
  std::string config_path_;
  std::string dir_;
  std::string stage_ = "setup";
  json stages_ = json::array();
  std::vector<std::string> outputs_;
};

CoefficientField make_field(const Config& c) {
  const std::string kind = c.text("field");
  if (kind == "helical") {
    HelicalParams hp;
    hp.k = c.number("k");
    hp.alpha = c.number("alpha");
    hp.beta = c.number("beta");
    hp.rstar = c.number("rstar");
    return helical_field(hp);
  }
  const QuadraticQ q{c.number("q_peak"), c.point("q_center"), c.number("q_curvature")};
  const Disk disk{c.number("radius")};
  if (kind == "identity") return identity_field(disk, q);
  const std::string b = c.text("b_expr");
  return b.empty() ? scalar_field_default(disk, q) : scalar_field_expr(disk, b, q);
}

Grid2D make_grid(const Config& c, const CoefficientField& f, const std::string& key = "h") {
  return build_grid(f.domain, c.number(key));
}

/// Lattice maximizer of q^2 sqrt(det K), polished by a compass search.
Vec2 landscape_peak(const CoefficientField& f, int n, Landscape* out = nullptr) {
  Landscape ls = landscape(f, n);
  Vec2 x = ls.argmax;
  double best = f.landscape_value(x);
  double step = std::max(ls.dx, ls.dy);
  const Vec2 dirs[4] = {Vec2(1, 0), Vec2(-1, 0), Vec2(0, 1), Vec2(0, -1)};
  while (step > 1e-13) {
    bool moved = false;
    for (const auto& d : dirs) {
      const Vec2 y = x + step * d;
      if (!contains_strict(f.domain, y)) continue;
      const double v = f.landscape_value(y);
      if (v > best) {
        best = v;
        x = y;
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  if (out) *out = std::move(ls);
  return x;
}

Vec2 target_point(const Config& c, const CoefficientField& f) {
  if (c.text("x0") != "auto") return c.point("x0");
  return landscape_peak(f, c.integer("landscape_n"));
}

/// Green provider chosen by the `greens` key.
struct Greens {
  std::unique_ptr<GreenProvider> base;
  std::unique_ptr<GreenProvider> wrapped;
  const GreenProvider& get() const { return wrapped ? *wrapped : *base; }
};

Greens make_greens(const Config& c, const CoefficientField& f, const Vec2& x0, double rho) {
  std::string kind = c.text("greens");
  const bool identity = c.text("field") == "identity";
  if (kind == "image" && !identity) throw ConfigError("key 'greens': image requires field = identity");
  if (kind == "auto") kind = identity ? "image" : "direct";
  Greens g;
  if (kind == "image") {
    g.base = std::make_unique<DiskImageGreen>(c.number("radius"));
    return g;
  }
  const double gh = c.number("green_h") > 0.0 ? c.number("green_h") : c.number("h");
  const Grid2D grid = build_grid(f.domain, gh);
  if (kind == "cache")
    g.base = std::make_unique<GreenCache>(f, grid, x0, rho);
  else
    g.base = std::make_unique<DirectGreen>(f, grid);
  if (f.rotation_invariant) g.wrapped = std::make_unique<RotationReducedGreen>(*g.base);
  return g;
}

MaximizeOptions maximize_options(const Config& c) {
  MaximizeOptions o;
  o.convention = c.text("angle_convention") == "pi" ? AngleConvention::Pi : AngleConvention::TwoPi;
  o.form = c.text("energy_form") == "expansion" ? EnergyForm::Expansion : EnergyForm::Displayed;
  o.seed = static_cast<unsigned>(c.integer("random_seed"));
  o.random_starts = c.integer("random_starts");
  return o;
}

AnsatzOptions ansatz_options(const Config& c) {
  AnsatzOptions a;
  a.L = c.number("L");
  a.gamma = c.number("gamma");
  a.relaxed = c.flag("relaxed");
  return a;
}

void write_rows(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::fprintf(fp, "%s\n", header.c_str());
  for (const auto& r : rows) {
    for (size_t i = 0; i < r.size(); ++i) std::fprintf(fp, i ? ",%.17g" : "%.17g", r[i]);
    std::fprintf(fp, "\n");
  }
  if (std::ferror(fp) || std::fclose(fp) != 0) throw IoError("cannot write " + path + ": " + std::strerror(errno));
}

json cluster_json(const ClusterState& c) {
  return {{"eps", c.eps}, {"delta", c.delta}, {"centers", to_json(c.centers)}, {"qhat", c.qhat}, {"s_delta", c.s}};
}

json terms_json(const ReducedEnergyTerms& t) {
  return {{"leading", t.leading},
          {"self", t.self},
          {"robin", t.robin},
          {"interaction", t.interaction},
          {"total", t.total},
          {"error_budget", t.error_budget}};
}

json rung_json(const LadderRung& rung, const CoefficientField& f, const Vec2& x0) {
  const auto& r = rung.result;
  const auto d = diagnostics(r, f, x0);
  json comps = json::array();
  for (const auto& c : r.components)
    comps.push_back({{"center", to_json(c.center)},
                     {"diameter", c.diameter},
                     {"circulation", c.circulation},
                     {"enclosing_radius", c.enclosing_radius},
                     {"inscribed_radius", c.inscribed_radius},
                     {"clearance", c.clearance},
                     {"reference", c.reference},
                     {"nodes", c.unknowns.size()}});
  return {{"eps", r.eps},
          {"delta", r.delta},
          {"p", r.p},
          {"h", r.grid->h},
          {"cluster", cluster_json(rung.cluster)},
          {"warm", rung.warm},
          {"residual", r.residual},
          {"tolerance", r.tolerance},
          {"iters", r.iterations},
          {"history", r.history},
          {"min_pivot", r.min_pivot},
          {"lu_fallback", r.lu_fallback},
          {"trivial", r.trivial},
          {"components", comps},
          {"total_circulation", r.total_circulation},
          {"cluster_reference", d.cluster_reference},
          {"max_residual", d.max_residual},
          {"energy", r.energy}};
}

std::shared_ptr<const RadialProfile> make_profile(const Config& c) {
  return std::make_shared<const RadialProfile>(compute_profile(c.number("p"), c.number("tol")));
}

LadderOptions ladder_options(const Config& c, SeedMode mode) {
  LadderOptions lo;
  lo.eps = c.numbers("eps_ladder");
  lo.seed = mode;
  if (mode == SeedMode::Manual) {
    lo.centers = c.points("centers");
    if (static_cast<int>(lo.centers.size()) != c.integer("m"))
      throw ConfigError("key 'centers': " + std::to_string(lo.centers.size()) + " centers for m = " +
                        std::to_string(c.integer("m")));
  }
  lo.warm_start = c.flag("warm_start");
  lo.newton.rel_tol = c.number("newton_tol");
  lo.newton.max_iter = c.integer("newton_maxit");
  lo.maximize = maximize_options(c);
  lo.ansatz = ansatz_options(c);
  return lo;
}

/// Ladder rungs plus solution CSVs and diagnostics.json.
std::vector<LadderRung> run_ladder(Run& run, const CoefficientField& f, const Grid2D& grid, const Vec2& x0,
                                   SeedMode mode) {
  const Config& c = run.cfg();
  const auto profile = run.stage("profile", [&] { return make_profile(c); });
  const double rho = c.number("rho");
  const auto greens = run.stage("greens", [&] { return make_greens(c, f, x0, rho); });
  const auto op = run.stage("assemble", [&] { return assemble(grid, f); });
  const LadderOptions lo = ladder_options(c, mode);
  const auto rungs = run.stage("ladder", [&] {
    return solve_ladder(op, f, c.integer("m"), c.number("p"), x0, rho, greens.get(), profile, lo);
  });
  run.stage("diagnostics", [&] {
    json rj = json::array();
    for (size_t i = 0; i < rungs.size(); ++i) {
      write_field_csv(run.path("solution_" + std::to_string(i) + ".csv"), grid, rungs[i].result.v);
      rj.push_back(rung_json(rungs[i], f, x0));
    }
    run.write_json("diagnostics.json", {{"x0", to_json(x0)}, {"m", c.integer("m")}, {"rungs", rj}});
  });
  return rungs;
}

/// Tubes, lifted field and the lifting identities of one solution.
void export_helix(Run& run, const SolveResult& res, const CoefficientField& f, bool always_tubes_vtk) {
  const Config& c = run.cfg();
  const double k = c.number("k");
  const int turns = c.integer("turns"), spt = c.integer("samples_per_turn");
  const auto tubes = tube_geometry(res, f, k, turns, spt, c.integer("rays"));
  CylLattice lat;
  lat.radius = domain_scale(f.domain);
  lat.nr = c.integer("lattice_nr");
  lat.ntheta = c.integer("lattice_ntheta");
  lat.nz = c.integer("lattice_nz");
  const auto field3d = vorticity3d(omega_sampler(res, f), k, lat);
  const std::string format = c.text("format");
  if (format == "vtk" || always_tubes_vtk) write_vtk_tubes(run.path("tubes.vtk"), tubes);
  if (format == "vtk") {
    BoxSampling box;
    box.n = c.integer("box_n");
    box.nz = c.integer("box_nz");
    box.turns = turns;
    write_vtk_field(run.path("field.vtk"), field3d, box);
  } else if (format == "csv") {
    write_field3d_csv(run.path("field3d.csv"), field3d);
  } else {
    write_tubes_json(run.path("tubes.json"), tubes);
  }
  json tj = json::array();
  for (const auto& t : tubes) {
    const auto& cl = t.centerline;
    tj.push_back({{"centerline_radius", std::hypot(cl.front()[0], cl.front()[1])},
                  {"rise_per_turn", cl[spt][2] - cl[0][2]},
                  {"centerline_points", cl.size()},
                  {"points", t.points.size()},
                  {"triangles", t.triangles.size()}});
  }
  const double scale = field3d.max_w();
  const auto eq = equivariance_check(field3d, 20, static_cast<unsigned>(c.integer("random_seed")));
  run.write_json("helix.json", {{"k", k},
                                {"turns", turns},
                                {"samples_per_turn", spt},
                                {"tubes", tj},
                                {"max_w", scale},
                                {"divergence", lattice_divergence(field3d)},
                                {"flux_z0", flux_z0(field3d, *res.grid)},
                                {"total_circulation", res.total_circulation},
                                {"equivariance_exact", eq.exact},
                                {"equivariance_interpolated", eq.interpolated}});
}

void cmd_profile(Run& run) {
  const Config& c = run.cfg();
  const auto prof = run.stage("profile", [&] { return compute_profile(c.number("p"), c.number("tol")); });
  run.stage("export", [&] {
    const auto poh = pohozaev_check(prof);
    run.write_json("profile.json", {{"p", prof.p},
                                    {"a", prof.a},
                                    {"dphi1", prof.dphi1},
                                    {"pohozaev_res1", poh.res1},
                                    {"pohozaev_res2", poh.res2},
                                    {"ode_residual", prof.ode_residual()}});
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < prof.r.size(); ++i) rows.push_back({prof.r[i], prof.phi[i], prof.dphi[i]});
    write_rows(run.path("profile.csv"), "r,phi,dphi", rows);
  });
}

void cmd_green(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const auto grid = make_grid(c, f);
  const Vec2 y = c.point("y");
  SolverOptions so;
  so.kind = c.text("solver") == "cg" ? SolverOptions::Kind::CG : SolverOptions::Kind::Direct;
  so.tol = c.number("cg_tol");
  so.maxit = c.integer("cg_maxit");
  const auto col = run.stage("green", [&] { return green_column(assemble(grid, f), f, y, so); });
  run.stage("export", [&] {
    std::vector<std::vector<double>> rows;
    for (int u = 0; u < grid.size(); ++u) {
      const Vec2 x = grid.unknown_point(u);
      rows.push_back({x[0], x[1], col.G[u], col.Sbar[u]});
    }
    write_rows(run.path("green.csv"), "x1,x2,G,Sbar", rows);
    const auto est = robin_from_column(col);
    run.write_json("green.json",
                   {{"y", to_json(y)}, {"h", grid.h}, {"robin", est.value}, {"spread", est.spread},
                    {"rings", {est.ring[0], est.ring[1], est.ring[2]}}});
  });
}

void cmd_ansatz(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const auto grid = make_grid(c, f);
  const Vec2 x0 = target_point(c, f);
  const double eps = c.number("eps"), rho = c.number("rho");
  const int m = c.integer("m");
  std::vector<Vec2> centers = c.points("centers");
  if (centers.empty())
    centers = polygon_seed(x0, m, eps, maximize_options(c).convention, rho);
  else if (static_cast<int>(centers.size()) != m)
    throw ConfigError("key 'centers': " + std::to_string(centers.size()) + " centers for m = " + std::to_string(m));
  const auto profile = run.stage("profile", [&] { return make_profile(c); });
  const auto greens = run.stage("greens", [&] { return make_greens(c, f, x0, rho); });
  auto cluster = make_cluster(eps, c.number("p"), centers, x0, rho);
  const auto amp = run.stage("amplitudes", [&] { return solve_amplitudes(f, cluster, *profile, greens.get()); });
  const auto an = run.stage("ansatz", [&] {
    return composite_ansatz(assemble(grid, f), f, cluster, profile, ansatz_options(c));
  });
  run.stage("export", [&] {
    write_field_csv(run.path("ansatz.csv"), grid, an.V);
    const auto& s = an.sign;
    json j = cluster_json(cluster);
    j["x0"] = to_json(x0);
    j["amplitude_iterations"] = amp.iterations;
    j["amplitude_residual"] = amp.residual;
    j["contraction"] = amp.contraction;
    j["sign_check"] = {{"L", s.L},
                       {"gamma", s.gamma},
                       {"inner_nodes", s.inner_nodes},
                       {"inner_violations", s.inner_violations},
                       {"outer_nodes", s.outer_nodes},
                       {"outer_violations", s.outer_violations}};
    run.write_json("ansatz.json", j);
  });
}

void cmd_reduce(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const Vec2 x0 = target_point(c, f);
  const double eps = c.number("eps"), rho = c.number("rho");
  const auto profile = run.stage("profile", [&] { return make_profile(c); });
  const auto greens = run.stage("greens", [&] { return make_greens(c, f, x0, rho); });
  const auto res = run.stage("maximize", [&] {
    return maximize(f, c.integer("m"), eps, c.number("p"), x0, rho, greens.get(), *profile, maximize_options(c));
  });
  run.stage("export", [&] {
    json j = cluster_json(res.cluster);
    j["x0"] = to_json(x0);
    j["terms"] = terms_json(res.terms);
    j["total"] = res.terms.total;
    json sv = json::array();
    for (double v : res.start_values) sv.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    j["start_values"] = sv;
    j["best_start"] = res.best_start;
    run.write_json("reduce.json", j);
  });
}

void cmd_solve(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const auto grid = make_grid(c, f);
  const Vec2 x0 = target_point(c, f);
  run_ladder(run, f, grid, x0, c.text("seed_mode") == "manual" ? SeedMode::Manual : SeedMode::Reduce);
}

void cmd_helix(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const auto grid = std::make_shared<const Grid2D>(make_grid(c, f));
  const auto rows = read_field_csv(c.text("input"));
  if (static_cast<int>(rows.size()) != grid->size())
    throw ConfigError("key 'input': " + std::to_string(rows.size()) + " rows but the grid has " +
                      std::to_string(grid->size()) + " unknowns");
  SolveResult res;
  res.grid = grid;
  res.eps = c.number("eps");
  res.p = c.number("p");
  res.delta = delta_of_eps(res.eps, res.p);
  res.v.resize(grid->size());
  for (int u = 0; u < grid->size(); ++u) {
    if ((Vec2(rows[u][0], rows[u][1]) - grid->unknown_point(u)).norm() > 1e-9 * grid->h)
      throw ConfigError("key 'input': node " + std::to_string(u) + " does not match the grid of key 'h'");
    res.v[u] = rows[u][2];
  }
  res.components = support_components(*grid, f, res.v, res.eps, res.p);
  for (const auto& comp : res.components) res.total_circulation += comp.circulation;
  run.stage("helix", [&] { export_helix(run, res, f, false); });
}

void cmd_pipeline(Run& run) {
  const Config& c = run.cfg();
  const auto f = make_field(c);
  const auto grid = make_grid(c, f);
  Landscape ls;
  const Vec2 x0 = run.stage("landscape", [&] {
    const Vec2 peak = landscape_peak(f, c.integer("landscape_n"), &ls);
    const Vec2 x = c.text("x0") == "auto" ? peak : target_point(c, f);
    validate_landscape(f, x, c.number("rho"));
    std::vector<std::vector<double>> rows;
    for (int j = 0; j < ls.ny; ++j)
      for (int i = 0; i < ls.nx; ++i) {
        const double v = ls.values[static_cast<size_t>(j) * ls.nx + i];
        if (std::isfinite(v)) rows.push_back({ls.point(i, j)[0], ls.point(i, j)[1], v});
      }
    write_rows(run.path("landscape.csv"), "x1,x2,value", rows);
    return x;
  });
  const auto rungs = run_ladder(run, f, grid, x0, SeedMode::Reduce);
  run.stage("reduce_summary", [&] {
    json rj = json::array();
    for (const auto& r : rungs) rj.push_back(cluster_json(r.cluster));
    run.write_json("reduce.json", {{"x0", to_json(x0)}, {"rungs", rj}});
  });
  run.stage("helix", [&] { export_helix(run, rungs.back().result, f, true); });
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + ": " + std::strerror(errno));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw IoError("sha256 initialisation failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int run_command(const std::string& command, const Config& config, const std::string& config_path) {
  static const std::map<std::string, std::function<void(Run&)>> table = {
      {"profile", cmd_profile}, {"green", cmd_green}, {"ansatz", cmd_ansatz},     {"reduce", cmd_reduce},
      {"solve", cmd_solve},     {"helix", cmd_helix}, {"pipeline", cmd_pipeline},
  };
  Run run(command, config, config_path);
  int code = kOk;
  std::string message;
  try {
    const auto it = table.find(command);
    if (it == table.end()) throw ConfigError("unknown subcommand '" + command + "'");
    config.validate(command);
    run.open();
    it->second(run);
  } catch (const ConfigError& e) {
    code = kConfigError;
    message = e.what();
    if (table.count(command)) run.try_open();
  } catch (const std::invalid_argument& e) {
    code = kConfigError;
    message = e.what();
  } catch (const IoError& e) {
    code = kIoError;
    message = e.what();
  } catch (const NumericalError& e) {
    code = kNumericalError;
    message = e.what();
  } catch (const std::exception& e) {
    code = kNumericalError;
    message = e.what();
  }
  if (code != kOk) std::cerr << "error: " << message << '\n';
  try {
    run.finish(code, message);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (code == kOk) code = kIoError;
  }
  return code;
}

}  // namespace vclust::cli
