#include "config.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "vclust/error.hpp"

namespace vclust::cli {

namespace {

KeySpec num(std::string name, std::string def, double lo, double hi, bool open_lo, std::string help) {
  KeySpec k;
  k.name = name;
  k.kind = KeyKind::Double;
  k.fallback = std::move(def);
  k.min = lo;
  k.max = hi;
  k.open_min = open_lo;
  k.help = std::move(help);
  return k;
}

KeySpec integer_key(std::string name, std::optional<std::string> def, double lo, double hi, std::string help) {
  KeySpec k;
  k.name = name;
  k.kind = KeyKind::Int;
  k.fallback = std::move(def);
  k.min = lo;
  k.max = hi;
  k.help = std::move(help);
  return k;
}

KeySpec choice(std::string name, std::optional<std::string> def, std::vector<std::string> choices, std::string help) {
  KeySpec k;
  k.name = name;
  k.kind = KeyKind::Choice;
  k.fallback = std::move(def);
  k.choices = std::move(choices);
  k.help = std::move(help);
  return k;
}

KeySpec typed(std::string name, KeyKind kind, std::optional<std::string> def, std::string help) {
  KeySpec k;
  k.name = name;
  k.kind = kind;
  k.fallback = std::move(def);
  k.help = std::move(help);
  return k;
}

std::vector<KeySpec> build_schema() {
  std::vector<KeySpec> s = {
      choice("field", std::nullopt, {"identity", "scalar", "helical"}, "coefficient field"),
      num("radius", "1", 0, 1e6, true, "disk radius (identity and scalar fields)"),
      num("q_peak", "2", 0, 1e6, true, "q = q_peak - q_curvature |x - q_center|^2"),
      typed("q_center", KeyKind::Point, "0,0", "center of the quadratic q"),
      num("q_curvature", "1", 0, 1e6, false, "curvature of the quadratic q"),
      typed("b_expr", KeyKind::String, "", "scalar field K = Id / b(x); empty selects b = 1 + |x|^2/4"),
      num("k", "1", 0, 1e6, true, "helical pitch"),
      num("alpha", "-0.5", -1e6, 1e6, false, "helical q = alpha r^2/2 + beta"),
      num("beta", "2", -1e6, 1e6, false, "helical q = alpha r^2/2 + beta"),
      num("rstar", "1", 0, 1e6, true, "helical cross-section radius"),
      num("h", "0.015625", 0, 0.25, true, "grid spacing"),
      choice("solver", "direct", {"direct", "cg"}, "linear solver for Green columns"),
      num("cg_tol", "1e-10", 0, 1, true, "CG relative residual target"),
      integer_key("cg_maxit", "0", 0, 1e9, "CG iteration cap, 0 for 10 x unknowns"),
      num("p", "2", 1, 16, true, "exponent of the nonlinearity"),
      num("tol", "1e-12", 0, 1e-3, true, "profile shooting tolerance"),
      typed("y", KeyKind::Point, std::nullopt, "Green source point"),
      num("eps", "0.05", 0, 0.5, true, "vortex scale"),
      typed("eps_ladder", KeyKind::DoubleList, "0.2,0.1,0.05", "decreasing eps continuation ladder"),
      integer_key("m", std::nullopt, 1, 12, "number of vortex cores"),
      typed("centers", KeyKind::PointList, "", "manual centers x1,x2;x1,x2;..."),
      typed("x0", KeyKind::String, "auto", "cluster target x1,x2, or auto for the landscape maximizer"),
      num("rho", "0.5", 0, 1e6, true, "radius of the admissible ball"),
      choice("angle_convention", "2pi", {"pi", "2pi"}, "polygon seed angle step"),
      choice("energy_form", "displayed", {"displayed", "expansion"}, "reduced energy form"),
      integer_key("random_seed", "0", 0, 2147483647.0, "seed of the multi-start generator"),
      integer_key("random_starts", "5", 0, 1000, "random admissible starts of the maximizer"),
      choice("seed_mode", "reduce", {"reduce", "manual"}, "ladder centers from the maximizer or from centers"),
      choice("greens", "auto", {"auto", "image", "direct", "cache"}, "Green provider for amplitudes and energy"),
      num("green_h", "0", 0, 0.25, false, "grid spacing of numeric Green columns, 0 for h"),
      num("L", "4", 1, 1e3, false, "sign check enlargement"),
      num("gamma", "0.5", 0, 1, true, "sign check shrink exponent"),
      typed("relaxed", KeyKind::Bool, "true", "ansatz needs only disjoint cores"),
      num("newton_tol", "1e-10", 0, 1e-2, true, "Newton residual target relative to max (v0 - q)_+^p"),
      integer_key("newton_maxit", "50", 1, 1000, "Newton iteration cap"),
      typed("warm_start", KeyKind::Bool, "true", "start each rung from the parent correction"),
      typed("input", KeyKind::String, std::nullopt, "field CSV written by solve"),
      integer_key("turns", "1", 1, 100, "helix turns"),
      integer_key("samples_per_turn", "32", 3, 4096, "rings per helix turn"),
      integer_key("rays", "48", 8, 4096, "contour rays per component"),
      choice("format", "vtk", {"vtk", "csv", "json"}, "helix export format"),
      integer_key("lattice_nr", "32", 2, 4096, "radial nodes of the cylindrical lattice"),
      integer_key("lattice_ntheta", "64", 4, 8192, "angular nodes of the cylindrical lattice"),
      integer_key("lattice_nz", "32", 2, 8192, "axial nodes of the cylindrical lattice"),
      integer_key("box_n", "32", 2, 1024, "VTK field box nodes per horizontal axis"),
      integer_key("box_nz", "32", 2, 1024, "VTK field box nodes along x3"),
      integer_key("landscape_n", "101", 3, 4001, "landscape samples per axis"),
      typed("out", KeyKind::String, "vclust_out", "output directory"),
  };
  for (auto& k : s) {
    k.flag = k.name;
    std::replace(k.flag.begin(), k.flag.end(), '_', '-');
  }
  for (auto& k : s)
    if (k.name == "seed_mode") k.flag = "seed";
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
    throw ConfigError("key '" + key + "': '" + s + "' is not a finite number");
  return v;
}

Vec2 parse_point(const std::string& key, const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("key '" + key + "': expected x1,x2 but got '" + s + "'");
  return Vec2(parse_double(key, parts[0]), parse_double(key, parts[1]));
}

void check_range(const KeySpec& k, double v) {
  const bool low = k.open_min ? v <= k.min : v < k.min;
  const bool high = k.open_max ? v >= k.max : v > k.max;
  if (low || high) {
    std::ostringstream os;
    os << "key '" << k.name << "': value " << v << " outside " << (k.open_min ? "(" : "[") << k.min << ", " << k.max
       << (k.open_max ? ")" : "]");
    throw ConfigError(os.str());
  }
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = build_schema();
  return s;
}

const KeySpec& key_spec(const std::string& name) {
  for (const auto& k : schema())
    if (k.name == name) return k;
  throw ConfigError("unknown key '" + name + "'");
}

const CommandKeys& command_keys(const std::string& command) {
  static const std::vector<std::string> field = {"field", "radius", "q_peak", "q_center", "q_curvature",
                                                 "b_expr", "k",      "alpha",  "beta",     "rstar"};
  static const std::vector<std::string> cluster = {"p",  "tol",   "m",   "centers", "x0", "rho", "angle_convention",
                                                   "greens", "green_h", "h", "out"};
  auto join = [](std::initializer_list<std::vector<std::string>> parts) {
    std::vector<std::string> out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  static const std::map<std::string, CommandKeys> table = {
      {"profile", {{"p", "tol", "out"}, {}}},
      {"green", {join({field, {"h", "solver", "cg_tol", "cg_maxit", "y", "out"}}), {"field", "y"}}},
      {"ansatz", {join({field, cluster, {"eps", "L", "gamma", "relaxed"}}), {"field", "eps", "m"}}},
      {"reduce",
       {join({field, cluster, {"eps", "energy_form", "random_seed", "random_starts"}}), {"field", "eps", "m"}}},
      {"solve",
       {join({field, cluster,
              {"eps_ladder", "energy_form", "random_seed", "random_starts", "seed_mode", "newton_tol", "newton_maxit",
               "warm_start", "L", "gamma", "relaxed"}}),
        {"field", "eps_ladder", "m"}}},
      {"helix",
       {join({field, {"h", "p", "eps", "input", "turns", "samples_per_turn", "rays", "format", "lattice_nr",
                      "lattice_ntheta", "lattice_nz", "box_n", "box_nz", "out"}}),
        {"field", "input", "eps"}}},
      {"pipeline",
       {join({field, cluster,
              {"eps_ladder", "energy_form", "random_seed", "random_starts", "newton_tol", "newton_maxit", "warm_start",
               "L", "gamma", "relaxed", "landscape_n", "turns", "samples_per_turn", "rays", "format", "lattice_nr",
               "lattice_ntheta", "lattice_nz", "box_n", "box_nz"}}),
        {"field", "eps_ladder", "m"}}},
  };
  const auto it = table.find(command);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + command + "'");
  return it->second;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"profile", "green", "ansatz", "reduce", "solve", "helix", "pipeline"};
  return names;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path + ": " + std::strerror(errno));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

Config Config::from_string(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(no) + ": expected key = value, got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    key_spec(key);
    if (c.has(key)) throw ConfigError(origin + ":" + std::to_string(no) + ": key '" + key + "' given twice");
    c.values_[key] = value;
  }
  return c;
}

void Config::set(const std::string& key, const std::string& value) {
  key_spec(key);
  values_[key] = value;
}

std::string Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it != values_.end()) return it->second;
  const auto& spec = key_spec(key);
  if (!spec.fallback) throw ConfigError("missing required key '" + key + "'");
  return *spec.fallback;
}

void Config::validate(const std::string& command) const {
  const auto& ck = command_keys(command);
  for (const auto& r : ck.required)
    if (!has(r)) throw ConfigError("missing required key '" + r + "'");
  for (const auto& [key, value] : values_)
    if (std::find(ck.keys.begin(), ck.keys.end(), key) == ck.keys.end())
      throw ConfigError("key '" + key + "' is not used by '" + command + "'");
  for (const auto& key : ck.keys) {
    const auto& spec = key_spec(key);
    if (!has(key) && !spec.fallback) continue;
    switch (spec.kind) {
      case KeyKind::Double: number(key); break;
      case KeyKind::Int: integer(key); break;
      case KeyKind::String: text(key); break;
      case KeyKind::Choice: text(key); break;
      case KeyKind::Point: point(key); break;
      case KeyKind::DoubleList: numbers(key); break;
      case KeyKind::PointList: points(key); break;
      case KeyKind::Bool: flag(key); break;
    }
  }
  if (has("x0") && text("x0") != "auto") parse_point("x0", text("x0"));
}

double Config::number(const std::string& key) const {
  const auto& spec = key_spec(key);
  const double v = parse_double(key, raw(key));
  check_range(spec, v);
  return v;
}

int Config::integer(const std::string& key) const {
  const auto& spec = key_spec(key);
  const std::string s = trim(raw(key));
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw ConfigError("key '" + key + "': '" + s + "' is not an integer");
  check_range(spec, static_cast<double>(v));
  return static_cast<int>(v);
}

std::string Config::text(const std::string& key) const {
  const auto& spec = key_spec(key);
  const std::string v = raw(key);
  if (spec.kind == KeyKind::Choice && std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
    std::string all;
    for (const auto& c : spec.choices) all += (all.empty() ? "" : "|") + c;
    throw ConfigError("key '" + key + "': '" + v + "' is not one of " + all);
  }
  return v;
}

bool Config::flag(const std::string& key) const {
  const std::string v = trim(raw(key));
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "': '" + v + "' is not a boolean");
}

Vec2 Config::point(const std::string& key) const { return parse_point(key, raw(key)); }

std::vector<double> Config::numbers(const std::string& key) const {
  std::vector<double> out;
  const std::string r = trim(raw(key));
  if (r.empty()) throw ConfigError("key '" + key + "': empty list");
  for (const auto& part : split(r, ',')) {
    out.push_back(parse_double(key, part));
    if (key == "eps_ladder") check_range(key_spec("eps"), out.back());
  }
  if (key == "eps_ladder")
    for (size_t i = 1; i < out.size(); ++i)
      if (!(out[i] < out[i - 1])) throw ConfigError("key 'eps_ladder': values must decrease strictly");
  return out;
}

std::vector<Vec2> Config::points(const std::string& key) const {
  std::vector<Vec2> out;
  const std::string r = trim(raw(key));
  if (r.empty()) return out;
  for (const auto& part : split(r, ';')) out.push_back(parse_point(key, part));
  return out;
}

nlohmann::json Config::resolved(const std::string& command) const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& key : command_keys(command).keys) {
    const auto it = values_.find(key);
    if (it != values_.end())
      j[key] = it->second;
    else if (key_spec(key).fallback)
      j[key] = *key_spec(key).fallback;
  }
  return j;
}

}  // namespace vclust::cli
