#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "gapfield/analysis.hpp"
#include "gapfield/common.hpp"
#include "gapfield/densities.hpp"
#include "gapfield/oracle.hpp"
#include "gapfield/potentials.hpp"
#include "gapfield/reporting.hpp"
#include "gapfield/runconfig.hpp"
#include "gapfield/solver.hpp"

namespace {

using namespace gapfield;
using nlohmann::json;

const char* kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::TwoDisks: return "two_disks";
    case ProblemKind::Dirichlet: return "dirichlet";
    default: return "neumann";
  }
}

json vec_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json point_json(const Vec2& p) { return json::array({p.x(), p.y()}); }

json traces_json(const GradientTraces& tr, int m) {
  json out;
  json theta = json::array();
  for (int j = 0; j < m; ++j) theta.push_back(2.0 * kPi * j / m);
  out["theta"] = std::move(theta);
  out["normal_out"] = vec_json(tr.normal_out);
  out["normal_in"] = vec_json(tr.normal_in);
  out["tangential"] = vec_json(tr.tangential);
  return out;
}

json truncation_json(const SeriesTruncation& tr) {
  json out;
  out["terms"] = tr.terms;
  out["tail"] = tr.tail;
  out["tol"] = tr.tol;
  out["threshold"] = tr.threshold;
  out["early"] = tr.early;
  return out;
}

json factors_json(const BoundFactors& bf) {
  json out;
  out["lower_factor"] = bf.lower_factor;
  out["upper_factor"] = bf.upper_factor;
  out["inf_term1"] = bf.inf_term1;
  out["inf_term2"] = bf.inf_term2;
  out["tangential"] = bf.tangential;
  out["regime_met"] = bf.regime_met;
  out["vacuous"] = bf.vacuous;
  return out;
}

json samples_json(const std::vector<Vec2>& pts,
                  const std::function<double(const Vec2&)>& u,
                  const std::function<Vec2(const Vec2&)>& grad) {
  json out;
  json points = json::array(), values = json::array(), grads = json::array();
  for (const Vec2& p : pts) {
    points.push_back(point_json(p));
    values.push_back(u(p));
    grads.push_back(point_json(grad(p)));
  }
  out["points"] = std::move(points);
  out["u"] = std::move(values);
  out["grad"] = std::move(grads);
  return out;
}

Conductivity conductivity_from(double k) {
  if (std::isinf(k)) return Conductivity::perfectly_conducting();
  if (k == 0.0) return Conductivity::insulating();
  return Conductivity::finite(k);
}

double rel_l2(const std::vector<const Eigen::VectorXd*>& got,
              const std::vector<const Eigen::VectorXd*>& want) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num += (*got[i] - *want[i]).squaredNorm();
    den += want[i]->squaredNorm();
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

struct OracleComparison {
  double rel = 0.0;
  double cond = 0.0;
  bool degraded = false;
};

OracleComparison compare_two_disks(const TwoDiskGeometry& geo,
                                   const HarmonicField& driver, double tol, int m) {
  const TwoDiskSeries series(geo, driver, tol);
  const TwoDiskDensities dens = two_disk_densities(series, m);
  const TwoDiskOracle orc = nystrom_two_disks(geo, driver, m);
  OracleComparison out;
  out.rel = rel_l2({&dens.phi1, &dens.phi2}, {&orc.phi1, &orc.phi2});
  out.cond = orc.cond;
  out.degraded = orc.degraded;
  return out;
}

OracleComparison compare_disk_in_disk(const DiskInDiskGeometry& geo,
                                      const FourierCoeffs& data, double tol, int m) {
  const DiskInDiskSeries series(geo, data, tol);
  const DiskInDiskDensities dens = disk_in_disk_densities(series, m, m);
  const DiskInDiskOracle orc = nystrom_disk_in_disk(geo, data, m, m);
  OracleComparison out;
  out.rel = rel_l2({&dens.g, &dens.phi_b}, {&orc.g, &orc.phi_b});
  out.cond = orc.cond;
  out.degraded = orc.degraded;
  return out;
}

// ----- solve -----

int run_solve(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  SolveOptions opts = cfg.opts;

  json report;
  report["config"] = json::parse(cfg.source);
  report["problem"] = kind_name(cfg.problem);

  if (cfg.problem == ProblemKind::TwoDisks) {
    const TwoDiskGeometry geo = two_disk_geometry(cfg);
    if (opts.nodes <= 0) opts.nodes = auto_nodes(geo.eps, std::min(cfg.r1, cfg.r2));
    const TwoDiskSolution s = solve_two_disks(geo, cfg.driver, opts);
    const BoundFactors bf = bound_factors(geo, cfg.driver);

    report["nodes"] = opts.nodes;
    report["truncation"] = truncation_json(s.truncation());
    report["bound_factors"] = factors_json(bf);
    report["traces"]["circle1"] = traces_json(s.traces(1), opts.nodes);
    report["traces"]["circle2"] = traces_json(s.traces(2), opts.nodes);
    report["critical"]["grad_X1"] = s.boundary_grad(1, 0.0, 1).norm();
    report["critical"]["grad_X2"] = s.boundary_grad(2, kPi, 1).norm();
    const SupNormEstimate sup = grad_sup_norm(s);
    report["sup_norm"]["value"] = sup.value;
    report["sup_norm"]["location"] = point_json(sup.location);

    std::vector<Vec2> pts;
    for (int i = 0; i < 16; ++i)
      pts.push_back(geo.frame.to_user(Vec2(cfg.r1 + geo.eps * (i + 1) / 17.0, 0.0)));
    const double far = 2.0 * (cfg.r1 + cfg.r2 + geo.eps);
    for (int i = 0; i < 16; ++i) {
      const double th = 2.0 * kPi * i / 16;
      pts.push_back(geo.frame.to_user(Vec2(far * std::cos(th), far * std::sin(th))));
    }
    report["samples"] = samples_json(
        pts, [&](const Vec2& p) { return s.eval(p); },
        [&](const Vec2& p) { return s.grad(p); });
  } else {
    const DiskInDiskGeometry geo = disk_in_disk_geometry(cfg);
    if (opts.nodes <= 0) opts.nodes = auto_nodes(geo.eps, cfg.r);
    const bool neumann = cfg.problem == ProblemKind::Neumann;
    const BoundFactors bf = bound_factors(geo, cfg.data, neumann);
    report["nodes"] = opts.nodes;
    report["bound_factors"] = factors_json(bf);

    std::vector<Vec2> pts;
    for (int i = 0; i < 16; ++i)
      pts.push_back(Vec2(cfg.rho - geo.eps + geo.eps * (i + 1) / 17.0, 0.0));
    const double ring = cfg.rho - geo.eps / 2.0;
    for (int i = 0; i < 16; ++i) {
      const double th = 2.0 * kPi * i / 16;
      pts.push_back(Vec2(ring * std::cos(th), ring * std::sin(th)));
    }

    if (neumann) {
      const NeumannSolution s = solve_neumann_disk_in_disk(geo, cfg.data, opts);
      report["truncation"] = truncation_json(s.conjugate().truncation());
      report["traces"]["inclusion"] = traces_json(s.inclusion_traces(), opts.nodes);
      report["traces"]["outer"] = traces_json(s.outer_traces(), opts.nodes);
      report["constants"]["annulus"] = s.constant_annulus();
      report["constants"]["inclusion"] = s.constant_inclusion();
      report["critical"]["grad_X1"] = s.boundary_grad(1, 0.0, 1).norm();
      report["critical"]["grad_X2"] = s.boundary_grad(2, 0.0, -1).norm();
      const SupNormEstimate sup = grad_sup_norm(s);
      report["sup_norm"]["value"] = sup.value;
      report["sup_norm"]["location"] = point_json(sup.location);
      report["samples"] = samples_json(
          pts, [&](const Vec2& p) { return s.eval(p); },
          [&](const Vec2& p) { return s.grad(p); });
    } else {
      const DirichletSolution s = solve_dirichlet_disk_in_disk(geo, cfg.data, opts);
      report["truncation"] = truncation_json(s.truncation());
      report["traces"]["inclusion"] = traces_json(s.inclusion_traces(), opts.nodes);
      report["traces"]["outer"] = traces_json(s.outer_traces(), opts.nodes);
      report["critical"]["grad_X1"] = s.boundary_grad(1, 0.0, 1).norm();
      report["critical"]["grad_X2"] = s.boundary_grad(2, 0.0, -1).norm();
      const SupNormEstimate sup = grad_sup_norm(s);
      report["sup_norm"]["value"] = sup.value;
      report["sup_norm"]["location"] = point_json(sup.location);
      report["samples"] = samples_json(
          pts, [&](const Vec2& p) { return s.eval(p); },
          [&](const Vec2& p) { return s.grad(p); });
    }
  }

  const std::string text = report.dump(2) + "\n";
  if (cfg.out_json.empty()) {
    std::cout << text;
  } else {
    write_text_file(cfg.out_json, text);
    std::cout << "solve report written to " << cfg.out_json << "\n";
  }
  return 0;
}

// ----- sweep -----

int run_sweep(const std::string& config_path, bool with_oracle) {
  const RunConfig cfg = load_run_config(config_path);
  SweepReport rep;
  if (cfg.problem == ProblemKind::TwoDisks)
    rep = sweep(two_disk_sweep_spec(cfg));
  else
    rep = sweep(disk_in_disk_sweep_spec(cfg));

  std::vector<double> oracle_errs;
  if (with_oracle) {
    oracle_errs.assign(rep.rows.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const SweepRow& row = rep.rows[i];
      // the dense collocation solve is only meaningful while its grid can
      // resolve the density peak, so the cross-check stops below eps = 1e-3
      if (row.failed || row.eps < 1e-3) continue;
      const int m = std::min(row.nodes > 0 ? row.nodes : 256, 1024);
      try {
        if (cfg.problem == ProblemKind::TwoDisks) {
          const TwoDiskGeometry geo = TwoDiskGeometry::canonical(
              cfg.r1, cfg.r2, row.eps, conductivity_from(row.k1),
              conductivity_from(row.k2));
          oracle_errs[i] = compare_two_disks(geo, cfg.driver, cfg.opts.tol, m).rel;
        } else {
          const DiskInDiskGeometry geo = DiskInDiskGeometry::canonical(
              cfg.rho, cfg.r, row.eps, conductivity_from(row.k1));
          oracle_errs[i] = compare_disk_in_disk(geo, cfg.data, cfg.opts.tol, m).rel;
        }
      } catch (const std::exception&) {
        // leave nan: the cross-check column never fails the sweep
      }
    }
  }

  const std::string csv_path = cfg.out_csv.empty() ? "sweep.csv" : cfg.out_csv;
  write_text_file(csv_path,
                  sweep_csv(rep, cfg.source, with_oracle ? &oracle_errs : nullptr));
  std::cout << "sweep CSV written to " << csv_path << "\n";
  if (!cfg.out_svg.empty()) {
    emit_plot(rep, cfg.out_svg);
    std::cout << "plot written to " << cfg.out_svg << "\n";
  }

  int failed = 0;
  for (const SweepRow& r : rep.rows) failed += r.failed ? 1 : 0;
  std::cout << "rows: " << rep.rows.size() << ", failed: " << failed << "\n";
  try {
    const RateFit fit = fit_blowup_rate(rep);
    std::printf("fitted blow-up rate: %.4f (stderr %.2g)\n", fit.slope,
                fit.stderr_slope);
  } catch (const ConfigError&) {
  }
  return failed == static_cast<int>(rep.rows.size()) && failed > 0 ? 3 : 0;
}

// ----- validate -----

struct CheckResult {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = false;
};

CheckResult make_check(const std::string& name, double value, double limit) {
  return CheckResult{name, value, limit, value < limit};
}

// one-sided gradient at x +/- (side) delta nu, linearly extrapolated to the surface
Vec2 extrapolated_grad(const std::function<Vec2(const Vec2&)>& grad, const Vec2& x,
                       const Vec2& nu, int side, double delta) {
  const Vec2 g1 = grad(Vec2(x + side * delta * nu));
  const Vec2 g2 = grad(Vec2(x + side * 2.0 * delta * nu));
  return Vec2(2.0 * g1 - g2);
}

double trace_scale(const GradientTraces& tr) {
  double s = 1e-30;
  s = std::max(s, tr.normal_out.cwiseAbs().maxCoeff());
  s = std::max(s, tr.normal_in.cwiseAbs().maxCoeff());
  s = std::max(s, tr.tangential.cwiseAbs().maxCoeff());
  return s;
}

double trace_error_two_disks(const TwoDiskSolution& s, int which, int m) {
  const Disk& d = which == 1 ? s.geometry().b1 : s.geometry().b2;
  const GradientTraces& tr = s.traces(which);
  const double delta = 1e-5 * d.radius;
  const double scale = trace_scale(tr);
  double worst = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double theta = 2.0 * kPi * (j * (m / 8)) / m;
    const Vec2 nu(std::cos(theta), std::sin(theta));
    const Vec2 x = Vec2(d.center + d.radius * nu);
    for (const int side : {1, -1}) {
      const Vec2 got = extrapolated_grad([&](const Vec2& p) { return s.grad(p); }, x,
                                         nu, side, delta);
      const Vec2 want = s.boundary_grad(which, theta, side);
      worst = std::max(worst, (got - want).norm() / scale);
    }
  }
  return worst;
}

template <typename Solution>
double trace_error_inclusion(const Solution& s, int m) {
  const Disk& d = s.geometry().b;
  const GradientTraces& tr = s.inclusion_traces();
  const double delta = 1e-5 * d.radius;
  const double scale = trace_scale(tr);
  double worst = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double theta = 2.0 * kPi * (j * (m / 8)) / m;
    const Vec2 nu(std::cos(theta), std::sin(theta));
    const Vec2 x = Vec2(d.center + d.radius * nu);
    for (const int side : {1, -1}) {
      const Vec2 got = extrapolated_grad([&](const Vec2& p) { return s.grad(p); }, x,
                                         nu, side, delta);
      const Vec2 want = s.boundary_grad(1, theta, side);
      worst = std::max(worst, (got - want).norm() / scale);
    }
  }
  return worst;
}

std::vector<CheckResult> run_jump_checks() {
  std::vector<CheckResult> out;
  const int m = 256;

  const TwoDiskGeometry geo = TwoDiskGeometry::canonical(
      1.0, 0.7, 0.05, Conductivity::finite(10.0), Conductivity::finite(0.25));
  const HarmonicField driver = HarmonicField::sum(
      {HarmonicField::affine(Vec2(1.0, 0.4)),
       HarmonicField::scale(0.1, HarmonicField::poly(Vec2(0.3, -0.2), 2, Cplx(1.0, 0.0)))});
  const TwoDiskSolution s2 = solve_two_disks(geo, driver, {m, 1e-10});
  out.push_back(make_check("two_disks.trace_vs_quadrature.circle1",
                           trace_error_two_disks(s2, 1, m), 1e-5));
  out.push_back(make_check("two_disks.trace_vs_quadrature.circle2",
                           trace_error_two_disks(s2, 2, m), 1e-5));

  const DiskInDiskGeometry geo_d =
      DiskInDiskGeometry::canonical(2.0, 1.0, 0.05, Conductivity::finite(10.0));
  FourierCoeffs f;
  f.ac = {2.0, 0.0, 0.4};
  f.as = {0.0, 0.6};
  const DirichletSolution sd = solve_dirichlet_disk_in_disk(geo_d, f, {m, 1e-10});
  out.push_back(make_check("dirichlet.trace_vs_quadrature.inclusion",
                           trace_error_inclusion(sd, m), 1e-5));

  const DiskInDiskGeometry geo_n =
      DiskInDiskGeometry::canonical(2.0, 1.0, 0.05, Conductivity::finite(0.2));
  FourierCoeffs g;
  g.ac = {1.0};
  g.as = {0.5};
  const NeumannSolution sn = solve_neumann_disk_in_disk(geo_n, g, {m, 1e-10});
  out.push_back(make_check("neumann.trace_vs_quadrature.inclusion",
                           trace_error_inclusion(sn, m), 1e-5));
  return out;
}

std::vector<CheckResult> run_series_checks() {
  std::vector<CheckResult> out;
  const TwoDiskGeometry geo = TwoDiskGeometry::canonical(
      1.0, 0.7, 0.05, Conductivity::finite(10.0), Conductivity::finite(0.25));
  const HarmonicField driver = HarmonicField::affine(Vec2(1.0, 0.4));
  const TwoDiskSeries series(geo, driver, 1e-10);
  const TwoDiskDensities dens = two_disk_densities(series, 256);
  out.push_back(
      make_check("two_disks.integral_equation_residual",
                 two_disk_residual(driver, dens), 1e-6));

  // certificate honesty: a loose-tolerance value must sit within its own
  // reported tail of the tight-tolerance value
  const Vec2 gap_point(geo.b1.radius, 0.0);
  const TwoDiskSeries loose(geo, driver, 1e-4);
  SeriesTruncation tr;
  const double coarse = loose.psi(1, gap_point, &tr);
  const double fine = series.psi(1, gap_point);
  out.push_back(make_check("two_disks.truncation_certificate",
                           std::abs(coarse - fine) /
                               (1.01 * tr.tail + 1e-12 * std::abs(fine) + 1e-300),
                           1.0));

  const DiskInDiskGeometry geo_d =
      DiskInDiskGeometry::canonical(2.0, 1.0, 0.1, Conductivity::finite(10.0));
  FourierCoeffs f;
  f.ac = {2.0};
  const DiskInDiskSeries sd(geo_d, f, 1e-10);
  const DiskInDiskDensities dd = disk_in_disk_densities(sd, 256, 256);
  out.push_back(make_check("disk_in_disk.integral_equation_residual",
                           disk_in_disk_residual(geo_d, f, dd), 1e-6));
  return out;
}

std::vector<CheckResult> run_oracle_checks() {
  std::vector<CheckResult> out;
  const TwoDiskGeometry geo = TwoDiskGeometry::canonical(
      1.0, 1.0, 0.1, Conductivity::finite(10.0), Conductivity::finite(4.0));
  out.push_back(make_check(
      "two_disks.series_vs_collocation",
      compare_two_disks(geo, HarmonicField::affine(Vec2(1.0, 0.0)), 1e-10, 256).rel,
      1e-8));

  const DiskInDiskGeometry geo_d =
      DiskInDiskGeometry::canonical(2.0, 1.0, 0.1, Conductivity::finite(10.0));
  FourierCoeffs f;
  f.ac = {2.0};
  out.push_back(make_check("disk_in_disk.series_vs_collocation",
                           compare_disk_in_disk(geo_d, f, 1e-10, 256).rel, 1e-8));
  return out;
}

int run_validate(const std::string& suite) {
  std::vector<CheckResult> checks;
  auto absorb = [&](std::vector<CheckResult> more) {
    checks.insert(checks.end(), more.begin(), more.end());
  };
  if (suite == "all" || suite == "jumps") absorb(run_jump_checks());
  if (suite == "all" || suite == "series") absorb(run_series_checks());
  if (suite == "all" || suite == "oracle") absorb(run_oracle_checks());

  bool all_pass = true;
  for (const CheckResult& c : checks) {
    std::printf("[%s] %-45s value=%.3e limit=%.0e\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.limit);
    all_pass = all_pass && c.pass;
  }
  std::printf("%zu checks, %s\n", checks.size(), all_pass ? "all passed" : "FAILURES");
  return all_pass ? 0 : 1;
}

// ----- oracle-compare -----

int run_oracle_compare(const std::string& config_path) {
  const RunConfig cfg = load_run_config(config_path);
  const int m = std::min(
      cfg.opts.nodes > 0
          ? cfg.opts.nodes
          : auto_nodes(cfg.eps, cfg.problem == ProblemKind::TwoDisks
                                    ? std::min(cfg.r1, cfg.r2)
                                    : cfg.r),
      1024);
  std::printf("%-10s %-12s %-12s %s\n", "problem", "rel_l2", "oracle_cond",
              "degraded");
  if (cfg.problem == ProblemKind::TwoDisks) {
    const OracleComparison c =
        compare_two_disks(two_disk_geometry(cfg), cfg.driver, cfg.opts.tol, m);
    std::printf("%-10s %-12.3e %-12.3e %s\n", "two_disks", c.rel, c.cond,
                c.degraded ? "yes" : "no");
  } else {
    const OracleComparison c = compare_disk_in_disk(disk_in_disk_geometry(cfg),
                                                    cfg.data, cfg.opts.tol, m);
    std::printf("%-10s %-12.3e %-12.3e %s\n", kind_name(cfg.problem), c.rel, c.cond,
                c.degraded ? "yes" : "no");
  }
  std::printf("densities compared on %d nodes per circle\n", m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gapfield: potential and field around nearly touching circular "
      "inclusions (GAPFIELD_THREADS caps parallelism)"};
  app.require_subcommand(1);

  std::string config_path;
  bool with_oracle = false;
  std::string suite = "all";

  CLI::App* solve =
      app.add_subcommand("solve", "run one configuration, write a JSON report");
  solve->add_option("--config", config_path, "JSON run configuration")->required();

  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "run the gap sweep, write CSV (and SVG if configured)");
  sweep_cmd->add_option("--config", config_path, "JSON run configuration")->required();
  sweep_cmd->add_flag("--oracle", with_oracle,
                      "append a dense-collocation cross-check column (rows with "
                      "eps >= 1e-3)");

  CLI::App* validate =
      app.add_subcommand("validate", "run the built-in invariant suites");
  validate->add_option("--suite", suite, "all, jumps, series, or oracle")
      ->check(CLI::IsMember({"all", "jumps", "series", "oracle"}));

  CLI::App* ocmp = app.add_subcommand(
      "oracle-compare", "compare series densities against the collocation solve");
  ocmp->add_option("--config", config_path, "JSON run configuration")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (solve->parsed()) return run_solve(config_path);
    if (sweep_cmd->parsed()) return run_sweep(config_path, with_oracle);
    if (validate->parsed()) return run_validate(suite);
    if (ocmp->parsed()) return run_oracle_compare(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
