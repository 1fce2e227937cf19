#include "gapfield/runconfig.hpp"

#include <json.hpp>

#include <cmath>
#include <complex>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

#include "gapfield/common.hpp"

namespace gapfield {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(where + " must be a JSON object");
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || item.key() == k;
    if (!ok) bad(where + ": unknown key \"" + item.key() + "\"");
  }
}

double get_num(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(where + " must be finite");
  return x;
}

int get_count(const json& v, const std::string& where) {
  if (!v.is_number_integer()) bad(where + " must be an integer");
  return v.get<int>();
}

Vec2 get_vec2(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2) bad(where + " must be a 2-element array");
  return Vec2(get_num(v[0], where + "[0]"), get_num(v[1], where + "[1]"));
}

Conductivity parse_conductivity(const json& v, const std::string& where) {
  if (v.is_string()) {
    if (v.get<std::string>() == "inf") return Conductivity::perfectly_conducting();
    bad(where + ": the only accepted string literal is \"inf\"");
  }
  if (!v.is_number()) bad(where + " must be a positive number, 0, or \"inf\"");
  const double k = v.get<double>();
  if (k == 0.0) return Conductivity::insulating();
  if (!(k > 0.0) || !std::isfinite(k))
    bad(where + " must be a positive number, 0, or \"inf\"");
  return Conductivity::finite(k);
}

FourierCoeffs parse_data(const json& d) {
  check_keys(d, "data", {"a0", "cos", "sin"});
  FourierCoeffs f;
  if (d.contains("a0")) f.a0 = get_num(d["a0"], "data.a0");
  for (const char* key : {"cos", "sin"}) {
    if (!d.contains(key)) continue;
    const json& arr = d[key];
    if (!arr.is_array()) bad(std::string("data.") + key + " must be an array");
    std::vector<double>& out = key[0] == 'c' ? f.ac : f.as;
    for (std::size_t i = 0; i < arr.size(); ++i)
      out.push_back(get_num(arr[i], std::string("data.") + key));
  }
  return f;
}

HarmonicField parse_driver(const json& d, const Frame& frame) {
  check_keys(d, "driver", {"affine", "constant", "poly"});
  std::vector<HarmonicField> terms;
  double constant = 0.0;
  if (d.contains("constant")) constant = get_num(d["constant"], "driver.constant");
  if (d.contains("affine")) {
    const Vec2 a = get_vec2(d["affine"], "driver.affine");
    // user-frame affine a.X + c reads a'.x + (a.origin + c) in the canonical frame
    terms.push_back(
        HarmonicField::affine(frame.vector_to_canonical(a), constant + a.dot(frame.origin)));
  } else if (d.contains("constant")) {
    terms.push_back(HarmonicField::affine(Vec2(0.0, 0.0), constant));
  }
  if (d.contains("poly")) {
    const json& arr = d["poly"];
    if (!arr.is_array()) bad("driver.poly must be an array");
    const Cplx rot(frame.c, frame.s);  // canonical -> user rotation as a phase
    for (const json& t : arr) {
      check_keys(t, "driver.poly[]", {"center", "n", "coef"});
      if (!t.contains("center") || !t.contains("n") || !t.contains("coef"))
        bad("driver.poly[] needs center, n, and coef");
      const int n = get_count(t["n"], "driver.poly[].n");
      if (n < 1) bad("driver.poly[].n must be >= 1 (drivers are entire)");
      const Vec2 center = get_vec2(t["center"], "driver.poly[].center");
      const Vec2 cf = get_vec2(t["coef"], "driver.poly[].coef");
      // Re(coef (X - C)^n) with X - C = rot (x - c') gives coef rot^n canonically
      terms.push_back(HarmonicField::poly(frame.to_canonical(center), n,
                                          Cplx(cf.x(), cf.y()) * std::pow(rot, n)));
    }
  }
  if (terms.empty()) bad("driver needs an affine part, a constant, or poly terms");
  if (terms.size() == 1) return terms[0];
  return HarmonicField::sum(std::move(terms));
}

bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

void parse_numerics(const json& j, RunConfig& c) {
  check_keys(j, "numerics", {"nodes", "tol", "eps_floor"});
  if (j.contains("nodes")) {
    const int m = get_count(j["nodes"], "numerics.nodes");
    if (m != 0 && (!is_pow2(m) || m < 32 || m > 16384))
      bad("numerics.nodes must be 0 (auto) or a power of two in [32, 16384]");
    c.opts.nodes = m;
  }
  if (j.contains("tol")) {
    const double t = get_num(j["tol"], "numerics.tol");
    if (!(t > 0.0) || t > 0.1) bad("numerics.tol must lie in (0, 0.1]");
    c.opts.tol = t;
  }
  if (j.contains("eps_floor")) {
    const double f = get_num(j["eps_floor"], "numerics.eps_floor");
    if (!(f > 0.0)) bad("numerics.eps_floor must be positive");
    c.eps_floor = f;
  }
}

void parse_sweep(const json& j, RunConfig& c) {
  check_keys(j, "sweep", {"eps", "k"});
  if (!j.contains("eps")) bad("sweep needs an eps list");
  const json& eps = j["eps"];
  if (!eps.is_array() || eps.empty()) bad("sweep.eps must be a nonempty array");
  for (const json& e : eps) {
    const double v = get_num(e, "sweep.eps[]");
    if (!(v > 0.0)) bad("sweep.eps[] must be positive");
    if (v < c.eps_floor) bad("sweep.eps[] is below numerics.eps_floor");
    c.sweep_eps.push_back(v);
  }
  if (!j.contains("k")) {
    // default k grid: the conductivity block alone
    if (c.problem == ProblemKind::TwoDisks)
      c.sweep_ks.emplace_back(c.k1, c.k2);
    else
      c.sweep_k.push_back(c.k);
    c.has_sweep = true;
    return;
  }
  const json& ks = j["k"];
  if (!ks.is_array() || ks.empty()) bad("sweep.k must be a nonempty array");
  if (c.problem == ProblemKind::TwoDisks) {
    for (const json& pair : ks) {
      if (!pair.is_array() || pair.size() != 2)
        bad("sweep.k[] must be [k1, k2] pairs for two_disks");
      c.sweep_ks.emplace_back(parse_conductivity(pair[0], "sweep.k[][0]"),
                              parse_conductivity(pair[1], "sweep.k[][1]"));
    }
  } else {
    for (const json& k : ks) c.sweep_k.push_back(parse_conductivity(k, "sweep.k[]"));
  }
  c.has_sweep = true;
}

void parse_output(const json& j, RunConfig& c) {
  check_keys(j, "output", {"csv", "json", "svg"});
  for (const char* key : {"csv", "json", "svg"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_string()) bad(std::string("output.") + key + " must be a string path");
    const std::string path = j[key].get<std::string>();
    if (path.empty()) bad(std::string("output.") + key + " must not be empty");
    (key[0] == 'c' ? c.out_csv : key[0] == 'j' ? c.out_json : c.out_svg) = path;
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    bad(std::string("not valid JSON: ") + e.what());
  }
  check_keys(j, "top level",
             {"problem", "geometry", "conductivity", "driver", "data", "numerics",
              "sweep", "output"});

  RunConfig c;
  if (!j.contains("problem") || !j["problem"].is_string())
    bad("problem must be one of \"two_disks\", \"dirichlet\", \"neumann\"");
  const std::string problem = j["problem"].get<std::string>();
  if (problem == "two_disks")
    c.problem = ProblemKind::TwoDisks;
  else if (problem == "dirichlet")
    c.problem = ProblemKind::Dirichlet;
  else if (problem == "neumann")
    c.problem = ProblemKind::Neumann;
  else
    bad("problem must be one of \"two_disks\", \"dirichlet\", \"neumann\"");

  if (j.contains("numerics")) parse_numerics(j["numerics"], c);

  if (!j.contains("geometry")) bad("geometry block is required");
  if (!j.contains("conductivity")) bad("conductivity block is required");
  const json& g = j["geometry"];
  const json& kk = j["conductivity"];

  if (c.problem == ProblemKind::TwoDisks) {
    if (j.contains("data")) bad("data is for the bounded problems; two_disks takes a driver");
    if (!j.contains("driver")) bad("two_disks needs a driver block");
    check_keys(g, "geometry", {"r1", "r2", "eps", "centers"});
    check_keys(kk, "conductivity", {"k1", "k2"});
    if (!kk.contains("k1") || !kk.contains("k2")) bad("conductivity needs k1 and k2");
    c.k1 = parse_conductivity(kk["k1"], "conductivity.k1");
    c.k2 = parse_conductivity(kk["k2"], "conductivity.k2");
    if (!g.contains("r1") || !g.contains("r2")) bad("geometry needs r1 and r2");
    c.r1 = get_num(g["r1"], "geometry.r1");
    c.r2 = get_num(g["r2"], "geometry.r2");
    std::optional<double> eps_declared;
    if (g.contains("eps")) eps_declared = get_num(g["eps"], "geometry.eps");
    TwoDiskGeometry geo;
    if (g.contains("centers")) {
      const json& cc = g["centers"];
      check_keys(cc, "geometry.centers", {"c1", "c2"});
      if (!cc.contains("c1") || !cc.contains("c2"))
        bad("geometry.centers needs c1 and c2");
      c.has_centers = true;
      c.c1 = get_vec2(cc["c1"], "geometry.centers.c1");
      c.c2 = get_vec2(cc["c2"], "geometry.centers.c2");
      geo = TwoDiskGeometry::from_centers(c.c1, c.r1, c.c2, c.r2, c.k1, c.k2,
                                          eps_declared);
    } else {
      if (!eps_declared) bad("geometry needs eps (or centers)");
      geo = TwoDiskGeometry::canonical(c.r1, c.r2, *eps_declared, c.k1, c.k2);
    }
    c.eps = geo.eps;
    c.driver = parse_driver(j["driver"], geo.frame);
  } else {
    if (j.contains("driver")) bad("driver is for two_disks; bounded problems take data");
    if (!j.contains("data")) bad("bounded problems need a data block");
    check_keys(g, "geometry", {"rho", "r", "eps"});
    check_keys(kk, "conductivity", {"k"});
    if (!kk.contains("k")) bad("conductivity needs k");
    c.k = parse_conductivity(kk["k"], "conductivity.k");
    if (!g.contains("rho") || !g.contains("r") || !g.contains("eps"))
      bad("geometry needs rho, r, and eps");
    c.rho = get_num(g["rho"], "geometry.rho");
    c.r = get_num(g["r"], "geometry.r");
    c.eps = get_num(g["eps"], "geometry.eps");
    const DiskInDiskGeometry geo =
        DiskInDiskGeometry::canonical(c.rho, c.r, c.eps, c.k);
    c.data = parse_data(j["data"]);
    (void)geo;
  }
  if (!(c.eps >= c.eps_floor))
    bad("geometry.eps is below numerics.eps_floor");

  if (j.contains("sweep")) parse_sweep(j["sweep"], c);
  if (j.contains("output")) parse_output(j["output"], c);

  c.source = j.dump();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

TwoDiskGeometry two_disk_geometry(const RunConfig& c) {
  if (c.problem != ProblemKind::TwoDisks)
    throw ConfigError("config: not a two_disks problem");
  if (c.has_centers)
    return TwoDiskGeometry::from_centers(c.c1, c.r1, c.c2, c.r2, c.k1, c.k2);
  return TwoDiskGeometry::canonical(c.r1, c.r2, c.eps, c.k1, c.k2);
}

DiskInDiskGeometry disk_in_disk_geometry(const RunConfig& c) {
  if (c.problem == ProblemKind::TwoDisks)
    throw ConfigError("config: not a bounded problem");
  return DiskInDiskGeometry::canonical(c.rho, c.r, c.eps, c.k);
}

TwoDiskSweepSpec two_disk_sweep_spec(const RunConfig& c) {
  if (c.problem != ProblemKind::TwoDisks)
    throw ConfigError("config: not a two_disks problem");
  if (!c.has_sweep) throw ConfigError("config: sweep block is required");
  TwoDiskSweepSpec s;
  s.r1 = c.r1;
  s.r2 = c.r2;
  s.eps = c.sweep_eps;
  s.ks = c.sweep_ks;
  s.driver = c.driver;
  s.opts = c.opts;
  return s;
}

DiskInDiskSweepSpec disk_in_disk_sweep_spec(const RunConfig& c) {
  if (c.problem == ProblemKind::TwoDisks)
    throw ConfigError("config: not a bounded problem");
  if (!c.has_sweep) throw ConfigError("config: sweep block is required");
  DiskInDiskSweepSpec s;
  s.rho = c.rho;
  s.r = c.r;
  s.neumann = c.problem == ProblemKind::Neumann;
  s.eps = c.sweep_eps;
  s.ks = c.sweep_k;
  s.data = c.data;
  s.opts = c.opts;
  return s;
}

}  // namespace gapfield
