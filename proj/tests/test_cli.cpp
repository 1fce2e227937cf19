#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gapfield/reporting.hpp"
#include "gapfield/runconfig.hpp"

using namespace gapfield;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const std::string& args, const std::string& tag) {
  const std::string out_path = "cli_" + tag + ".out";
  const std::string err_path = "cli_" + tag + ".err";
  const std::string cmd =
      std::string(GAPFIELD_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = status >= 0 ? WEXITSTATUS(status) : -1;
  r.out = read_text_file(out_path);
  r.err = read_text_file(err_path);
  return r;
}

void write_config(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2));
}

json small_sweep_config(const std::string& csv_path) {
  json j;
  j["problem"] = "two_disks";
  j["geometry"] = {{"r1", 1.0}, {"r2", 1.0}, {"eps", 0.1}};
  j["conductivity"] = {{"k1", 5.0}, {"k2", 5.0}};
  j["driver"] = {{"affine", {1.0, 0.0}}};
  j["numerics"] = {{"nodes", 256}};
  j["sweep"] = {{"eps", {0.1, 0.02}}, {"k", {{5.0, 5.0}}}};
  j["output"] = {{"csv", csv_path}};
  return j;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column names
      continue;
    }
    out.push_back(line);
  }
  return out;
}

std::vector<double> split_csv_row(const std::string& line) {
  std::vector<double> out;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(std::strtod(cell.c_str(), nullptr));
  return out;
}

}  // namespace

TEST_CASE("malformed configurations exit with the schema code") {
  json bad = small_sweep_config("unused.csv");
  bad["geometry"]["eps"] = -0.5;
  write_config("cli_bad_eps.json", bad);
  RunResult r = run_cli("solve --config cli_bad_eps.json", "bad_eps");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("configuration error") != std::string::npos);

  json unknown = small_sweep_config("unused.csv");
  unknown["geometri"] = json::object();
  write_config("cli_bad_key.json", unknown);
  CHECK(run_cli("solve --config cli_bad_key.json", "bad_key").exit_code == 2);

  write_text_file("cli_bad_syntax.json", "{not json");
  CHECK(run_cli("solve --config cli_bad_syntax.json", "bad_syntax").exit_code == 2);

  CHECK(run_cli("solve --config cli_missing_file.json", "missing").exit_code == 2);

  // a bogus subcommand or missing required option is also a config-level error
  CHECK(run_cli("frobnicate", "bad_cmd").exit_code == 2);
  CHECK(run_cli("solve", "no_config").exit_code == 2);
}

TEST_CASE("the frozen header leads every sweep CSV") {
  const json cfg = small_sweep_config("cli_header.csv");
  write_config("cli_header.json", cfg);
  RunResult r = run_cli("sweep --config cli_header.json", "header");
  REQUIRE(r.exit_code == 0);
  const std::string csv = read_text_file("cli_header.csv");
  std::istringstream in(csv);
  std::string first;
  std::getline(in, first);
  CHECK(first == std::string(kSweepCsvHeader));
  CHECK(csv.find("# config: ") != std::string::npos);
  CHECK(csv.find("# kind=two_disks") != std::string::npos);
  CHECK(data_lines(csv).size() == 2);
}

TEST_CASE("a trivial pair reports the driver field everywhere sampled") {
  json cfg;
  cfg["problem"] = "two_disks";
  cfg["geometry"] = {{"r1", 1.0}, {"r2", 1.0}, {"eps", 0.3}};
  cfg["conductivity"] = {{"k1", 1.0}, {"k2", 1.0}};
  cfg["driver"] = {{"affine", {0.7, -0.3}}, {"constant", 0.2}};
  cfg["numerics"] = {{"nodes", 256}};
  cfg["output"] = {{"json", "cli_trivial.json.out"}};
  write_config("cli_trivial.json", cfg);
  RunResult r = run_cli("solve --config cli_trivial.json", "trivial");
  REQUIRE(r.exit_code == 0);

  const json report = json::parse(read_text_file("cli_trivial.json.out"));
  CHECK(report.at("problem") == "two_disks");
  CHECK(report.at("config").at("problem") == "two_disks");
  const auto& samples = report.at("samples");
  const auto& pts = samples.at("points");
  const auto& u = samples.at("u");
  const auto& grad = samples.at("grad");
  REQUIRE(pts.size() == 32);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double x = pts[i][0].get<double>();
    const double y = pts[i][1].get<double>();
    const double expected = 0.7 * x - 0.3 * y + 0.2;
    CHECK(u[i].get<double>() == doctest::Approx(expected).epsilon(1e-9));
    CHECK(grad[i][0].get<double>() == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(grad[i][1].get<double>() == doctest::Approx(-0.3).epsilon(1e-9));
  }
  const double expected_mag = std::hypot(0.7, 0.3);
  CHECK(report.at("critical").at("grad_X1").get<double>() ==
        doctest::Approx(expected_mag).epsilon(1e-9));
  CHECK(report.at("sup_norm").at("value").get<double>() ==
        doctest::Approx(expected_mag).epsilon(1e-8));
}

TEST_CASE("sweeps rerun from their own footer reproduce every number") {
  const json cfg = small_sweep_config("cli_rt.csv");
  write_config("cli_rt.json", cfg);
  REQUIRE(run_cli("sweep --config cli_rt.json", "rt1").exit_code == 0);
  const std::string csv1 = read_text_file("cli_rt.csv");

  // pull the embedded config back out of the footer and rerun from it
  const std::string marker = "# config: ";
  const std::size_t at = csv1.find(marker);
  REQUIRE(at != std::string::npos);
  const std::size_t end = csv1.find('\n', at);
  const std::string stored = csv1.substr(at + marker.size(), end - at - marker.size());
  write_text_file("cli_rt2.json", stored);
  REQUIRE(run_cli("sweep --config cli_rt2.json", "rt2").exit_code == 0);
  const std::string csv2 = read_text_file("cli_rt.csv");

  const auto rows1 = data_lines(csv1);
  const auto rows2 = data_lines(csv2);
  REQUIRE(rows1.size() == rows2.size());
  for (std::size_t i = 0; i < rows1.size(); ++i) {
    const auto a = split_csv_row(rows1[i]);
    const auto b = split_csv_row(rows2[i]);
    REQUIRE(a.size() == b.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
      const double scale = std::max({1.0, std::abs(a[c]), std::abs(b[c])});
      CHECK(std::abs(a[c] - b[c]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("a configured plot arrives as a self-contained SVG") {
  json cfg = small_sweep_config("cli_svg.csv");
  cfg["output"]["svg"] = "cli_plot.svg";
  write_config("cli_svg.json", cfg);
  REQUIRE(run_cli("sweep --config cli_svg.json", "svg").exit_code == 0);
  const std::string svg = read_text_file("cli_plot.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("slope") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
  CHECK(svg.find("http://") == svg.find("http://www.w3.org/2000/svg"));
}

TEST_CASE("bounded problems run through config and oracle comparison") {
  json cfg;
  cfg["problem"] = "dirichlet";
  cfg["geometry"] = {{"rho", 2.0}, {"r", 1.0}, {"eps", 0.1}};
  cfg["conductivity"] = {{"k", 10.0}};
  cfg["data"] = {{"cos", {2.0}}};
  cfg["numerics"] = {{"nodes", 256}};
  write_config("cli_did.json", cfg);

  RunResult solve = run_cli("solve --config cli_did.json", "did_solve");
  REQUIRE(solve.exit_code == 0);
  const json report = json::parse(solve.out);
  CHECK(report.at("problem") == "dirichlet");
  CHECK(report.at("critical").at("grad_X1").get<double>() > 0.0);
  CHECK(report.at("traces").contains("inclusion"));

  RunResult cmp = run_cli("oracle-compare --config cli_did.json", "did_cmp");
  REQUIRE(cmp.exit_code == 0);
  CHECK(cmp.out.find("rel_l2") != std::string::npos);
  CHECK(cmp.out.find("dirichlet") != std::string::npos);
}

TEST_CASE("the jump validation suite passes") {
  RunResult r = run_cli("validate --suite jumps", "validate_jumps");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("[PASS]") != std::string::npos);
  CHECK(r.out.find("[FAIL]") == std::string::npos);
  CHECK(run_cli("validate --suite bogus", "validate_bogus").exit_code == 2);
}

TEST_CASE("config parsing round-trips and validates literals") {
  const json cfg = small_sweep_config("x.csv");
  const RunConfig a = parse_run_config(cfg.dump());
  const RunConfig b = parse_run_config(a.source);
  CHECK(a.source == b.source);
  CHECK(a.eps == 0.1);
  CHECK(a.sweep_eps.size() == 2);
  CHECK(a.sweep_ks.size() == 1);

  json lit = cfg;
  lit["conductivity"]["k1"] = "inf";
  lit["conductivity"]["k2"] = 0;
  const RunConfig c = parse_run_config(lit.dump());
  CHECK(c.k1.kind == Conductivity::Kind::PerfectlyConducting);
  CHECK(c.k2.kind == Conductivity::Kind::Insulating);

  json badlit = cfg;
  badlit["conductivity"]["k1"] = "huge";
  CHECK_THROWS_AS(parse_run_config(badlit.dump()), ConfigError);
  json negk = cfg;
  negk["conductivity"]["k1"] = -2.0;
  CHECK_THROWS_AS(parse_run_config(negk.dump()), ConfigError);
  json badnodes = cfg;
  badnodes["numerics"]["nodes"] = 200;
  CHECK_THROWS_AS(parse_run_config(badnodes.dump()), ConfigError);
  json floorcfg = cfg;
  floorcfg["numerics"]["eps_floor"] = 0.05;
  floorcfg["sweep"]["eps"] = {0.1, 0.02};
  CHECK_THROWS_AS(parse_run_config(floorcfg.dump()), ConfigError);

  // a sweep without a k list falls back to the conductivity block
  json nok = cfg;
  nok["sweep"].erase("k");
  const RunConfig d = parse_run_config(nok.dump());
  CHECK(d.has_sweep);
  REQUIRE(d.sweep_ks.size() == 1);
  CHECK(d.sweep_ks[0].first.value == 5.0);
  CHECK(d.sweep_ks[0].second.value == 5.0);
}

TEST_CASE("off-axis placements convert the driver into the canonical frame") {
  json cfg;
  cfg["problem"] = "two_disks";
  cfg["geometry"] = {{"r1", 1.0}, {"r2", 1.0}};
  cfg["geometry"]["centers"] = {{"c1", {1.0, 2.0}}, {"c2", {1.0 + 2.1 / std::sqrt(2.0),
                                                            2.0 + 2.1 / std::sqrt(2.0)}}};
  cfg["conductivity"] = {{"k1", 5.0}, {"k2", 5.0}};
  cfg["driver"] = {{"affine", {1.0, 0.0}}, {"constant", 0.5}};
  const RunConfig c = parse_run_config(cfg.dump());
  CHECK(c.eps == doctest::Approx(0.1).epsilon(1e-12));
  // the user-frame driver x + 0.5 evaluated at the first center (1,2) is 1.5;
  // the canonical driver must take the same value at the origin
  CHECK(c.driver.eval(Vec2(0.0, 0.0)) == doctest::Approx(1.5).epsilon(1e-12));
  // gradient magnitude is frame-invariant
  CHECK(c.driver.grad(Vec2(0.3, 0.4)).norm() == doctest::Approx(1.0).epsilon(1e-12));
}
