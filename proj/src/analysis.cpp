#include "gapfield/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include "gapfield/common.hpp"

namespace gapfield {

namespace {

constexpr int kSegmentSamples = 1024;

// Smallest |<grad field, dir>| over the closed segment [a, b], sampled densely
// with both endpoints included. The fields that arrive here are smooth along
// the gap axis, so dense sampling resolves the infimum to plotting accuracy.
double segment_infimum(const std::function<Vec2(const Vec2&)>& grad, const Vec2& a,
                       const Vec2& b, const Vec2& dir) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kSegmentSamples; ++i) {
    const double t = static_cast<double>(i) / (kSegmentSamples - 1);
    const Vec2 x = Vec2(a + t * (b - a));
    best = std::min(best, std::abs(grad(x).dot(dir)));
  }
  return best;
}

double conductivity_as_double(const Conductivity& k) {
  switch (k.kind) {
    case Conductivity::Kind::PerfectlyConducting:
      return std::numeric_limits<double>::infinity();
    case Conductivity::Kind::Insulating:
      return 0.0;
    default:
      return k.value;
  }
}

}  // namespace

BoundFactors bound_factors(const TwoDiskGeometry& geo, const HarmonicField& driver) {
  if (driver.empty()) throw ConfigError("bound factors need a nonempty driver");
  const DerivedScalars sc = derived_scalars(geo);
  const CriticalGeometry cg = critical_geometry(geo);
  const double se = std::sqrt(geo.eps);

  BoundFactors out;
  out.kind = ProblemKind::TwoDisks;
  out.lower_factor = 1.0 / (1.0 - sc.tau + sc.r_star / sc.r_min * se);
  out.upper_factor = 1.0 / (1.0 - std::abs(sc.tau) + sc.r_star / sc.r_max * se);

  // Both inclusions above the background select the normal projection, both
  // below the tangential one. Mixed pairs fall outside the lower-estimate
  // hypothesis; the normal projection is still reported with regime_met off.
  const double s1 = geo.k1.sigma();
  const double s2 = geo.k2.sigma();
  out.tangential = s1 < 0.0 && s2 < 0.0;
  out.regime_met = (s1 > 0.0 && s2 > 0.0) || (s1 < 0.0 && s2 < 0.0);

  const Vec2 nu1 = Vec2((cg.X1 - geo.b1.center).normalized());
  const Vec2 nu2 = Vec2((cg.X2 - geo.b2.center).normalized());
  const Vec2 d1 = out.tangential ? rot90(nu1) : nu1;
  const Vec2 d2 = out.tangential ? rot90(nu2) : nu2;
  auto g = [&](const Vec2& x) { return driver.grad(x); };
  out.inf_term1 = segment_infimum(g, cg.seg1_a, cg.seg1_b, d1);
  out.inf_term2 = segment_infimum(g, cg.seg1_a, cg.seg1_b, d2);
  out.vacuous = std::min(out.inf_term1, out.inf_term2) <= 0.0;
  return out;
}

BoundFactors bound_factors(const DiskInDiskGeometry& geo, const FourierCoeffs& data,
                           bool neumann) {
  const DerivedScalars sc = derived_scalars(geo);
  const CriticalGeometry cg = critical_geometry(geo);
  const double se = std::sqrt(geo.eps);
  const double sig = geo.k.sigma();

  BoundFactors out;
  out.kind = neumann ? ProblemKind::Neumann : ProblemKind::Dirichlet;
  out.upper_factor = 1.0 / (1.0 - std::abs(sig) + sc.r_star_hat * se);
  if (neumann) {
    out.lower_factor = 1.0 / (1.0 + sig + 4.0 * sc.r_star_hat * se);
    out.tangential = true;
    out.regime_met = sig < 0.0;
  } else {
    out.lower_factor = 1.0 / (1.0 - sig + 4.0 * sc.r_star_hat * se);
    out.tangential = false;
    out.regime_met = sig > 0.0;
  }

  // The blow-up is gauged against the data layer of the outer circle alone:
  // the double layer of Dirichlet data, the single layer of flux data. Both
  // have closed forms valid on either side of the outer circle, which J2
  // crosses into.
  const CircleHarmonics layer = neumann ? single_layer_closed_form(geo.omega(), data)
                                        : double_layer_closed_form(geo.omega(), data);
  const Vec2 nu_b = Vec2((cg.X1 - geo.b.center).normalized());
  const Vec2 nu_o = Vec2(cg.X2.normalized());
  const Vec2 d1 = out.tangential ? rot90(nu_b) : nu_b;
  const Vec2 d2 = out.tangential ? rot90(nu_o) : nu_o;
  auto g = [&](const Vec2& x) { return layer.grad(x); };
  out.inf_term1 = segment_infimum(g, cg.seg1_a, cg.seg1_b, d1);
  out.inf_term2 = segment_infimum(g, cg.seg2_a, cg.seg2_b, d2);
  out.vacuous = std::min(out.inf_term1, out.inf_term2) <= 0.0;
  return out;
}

int auto_nodes(double eps, double r_min) {
  const double want = 8.0 / std::sqrt(eps / r_min);
  int m = 256;
  while (m < want && m < 2048) m *= 2;
  return m;
}

namespace {

void finish_row(SweepRow& row, const BoundFactors& bf, double grad_x1, double grad_x2,
                double sup_norm, int terms) {
  row.grad_x1 = grad_x1;
  row.grad_x2 = grad_x2;
  row.sup_norm = sup_norm;
  row.lower_factor = bf.lower_factor;
  row.upper_factor = bf.upper_factor;
  row.inf_term = bf.inf_term1;
  row.terms_used = terms;
  row.vacuous = bf.vacuous;
  row.ratio_low = bf.vacuous ? 0.0 : grad_x1 / (bf.lower_factor * bf.inf_term1);
  row.ratio_up = sup_norm / bf.upper_factor;
}

std::vector<double> sorted_eps(const std::vector<double>& eps) {
  std::vector<double> out = eps;
  std::sort(out.begin(), out.end());
  return out;
}

// 64 interior samples of |grad u| across the gap, t measured from the first
// closest point.
template <typename Solution>
void capture_gap_profile(SweepReport& rep, const Solution& s, double x_start,
                         double eps) {
  constexpr int kProfile = 64;
  rep.gap_profile.clear();
  rep.gap_profile.reserve(kProfile);
  for (int i = 0; i < kProfile; ++i) {
    const double t = eps * (i + 1) / (kProfile + 1);
    GapSample gs;
    gs.t = t;
    gs.magnitude = s.grad(Vec2(x_start + t, 0.0)).norm();
    rep.gap_profile.push_back(gs);
  }
  rep.gap_eps = eps;
}

}  // namespace

SweepReport sweep(const TwoDiskSweepSpec& spec) {
  if (spec.eps.empty() || spec.ks.empty())
    throw ConfigError("sweep needs nonempty eps and conductivity lists");
  if (spec.driver.empty()) throw ConfigError("sweep needs a driver");

  SweepReport rep;
  rep.kind = ProblemKind::TwoDisks;
  const std::vector<double> eps = sorted_eps(spec.eps);
  for (const double e : eps) {
    for (const auto& kk : spec.ks) {
      SweepRow row;
      row.eps = e;
      row.k1 = conductivity_as_double(kk.first);
      row.k2 = conductivity_as_double(kk.second);
      try {
        const TwoDiskGeometry geo =
            TwoDiskGeometry::canonical(spec.r1, spec.r2, e, kk.first, kk.second);
        SolveOptions opts = spec.opts;
        if (opts.nodes <= 0) opts.nodes = auto_nodes(e, std::min(spec.r1, spec.r2));
        row.nodes = opts.nodes;
        const TwoDiskSolution s = solve_two_disks(geo, spec.driver, opts);
        const BoundFactors bf = bound_factors(geo, spec.driver);
        finish_row(row, bf, s.boundary_grad(1, 0.0, 1).norm(),
                   s.boundary_grad(2, kPi, 1).norm(), grad_sup_norm(s).value,
                   s.truncation().terms);
        if (rep.gap_profile.empty() && e == eps.front())
          capture_gap_profile(rep, s, spec.r1, e);
      } catch (const std::exception& err) {
        row.failed = true;
        row.error = err.what();
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

SweepReport sweep(const DiskInDiskSweepSpec& spec) {
  if (spec.eps.empty() || spec.ks.empty())
    throw ConfigError("sweep needs nonempty eps and conductivity lists");

  SweepReport rep;
  rep.kind = spec.neumann ? ProblemKind::Neumann : ProblemKind::Dirichlet;
  const std::vector<double> eps = sorted_eps(spec.eps);
  for (const double e : eps) {
    for (const Conductivity& k : spec.ks) {
      SweepRow row;
      row.eps = e;
      row.k1 = conductivity_as_double(k);
      row.k2 = 1.0;  // background
      try {
        const DiskInDiskGeometry geo =
            DiskInDiskGeometry::canonical(spec.rho, spec.r, e, k);
        SolveOptions opts = spec.opts;
        if (opts.nodes <= 0) opts.nodes = auto_nodes(e, spec.r);
        row.nodes = opts.nodes;
        const BoundFactors bf = bound_factors(geo, spec.data, spec.neumann);
        double g1 = 0.0, g2 = 0.0, sup = 0.0;
        int terms = 0;
        if (spec.neumann) {
          const NeumannSolution s = solve_neumann_disk_in_disk(geo, spec.data, opts);
          g1 = s.boundary_grad(1, 0.0, 1).norm();
          g2 = s.boundary_grad(2, 0.0, -1).norm();
          sup = grad_sup_norm(s).value;
          terms = s.conjugate().truncation().terms;
          if (rep.gap_profile.empty() && e == eps.front())
            capture_gap_profile(rep, s, spec.rho - e, e);
        } else {
          const DirichletSolution s = solve_dirichlet_disk_in_disk(geo, spec.data, opts);
          g1 = s.boundary_grad(1, 0.0, 1).norm();
          g2 = s.boundary_grad(2, 0.0, -1).norm();
          sup = grad_sup_norm(s).value;
          terms = s.truncation().terms;
          if (rep.gap_profile.empty() && e == eps.front())
            capture_gap_profile(rep, s, spec.rho - e, e);
        }
        finish_row(row, bf, g1, g2, sup, terms);
      } catch (const std::exception& err) {
        row.failed = true;
        row.error = err.what();
      }
      rep.rows.push_back(std::move(row));
    }
  }
  return rep;
}

RateFit fit_blowup_rate(const SweepReport& report) {
  std::vector<std::pair<double, double>> pts;  // (log eps, log grad)
  double emin = std::numeric_limits<double>::infinity();
  double emax = 0.0;
  for (const SweepRow& row : report.rows) {
    if (row.failed || !(row.grad_x1 > 0.0) || !std::isfinite(row.grad_x1)) continue;
    pts.emplace_back(std::log(row.eps), std::log(row.grad_x1));
    emin = std::min(emin, row.eps);
    emax = std::max(emax, row.eps);
  }
  if (pts.size() < 4)
    throw ConfigError("rate fit needs at least 4 successful rows");
  if (emax / emin < 100.0 * (1.0 - 1e-9))
    throw ConfigError("rate fit needs eps spanning at least two decades");

  const int n = static_cast<int>(pts.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : pts) {
    sx += p.first;
    sy += p.second;
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : pts) {
    sxx += (p.first - mx) * (p.first - mx);
    sxy += (p.first - mx) * (p.second - my);
  }

  RateFit fit;
  fit.rows_used = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (const auto& p : pts) {
    const double r = p.second - (fit.intercept + fit.slope * p.first);
    ssr += r * r;
    fit.max_residual = std::max(fit.max_residual, std::abs(r));
  }
  if (n > 2) fit.stderr_slope = std::sqrt(ssr / (n - 2) / sxx);
  return fit;
}

SandwichResult sandwich_check(const SweepReport& report) {
  SandwichResult out;
  bool low_any = false, up_any = false;
  for (const SweepRow& row : report.rows) {
    if (row.failed) {
      ++out.excluded;
      continue;
    }
    ++out.rows_used;
    if (std::isfinite(row.ratio_up) && row.ratio_up > 0.0) {
      out.up_min = up_any ? std::min(out.up_min, row.ratio_up) : row.ratio_up;
      out.up_max = up_any ? std::max(out.up_max, row.ratio_up) : row.ratio_up;
      up_any = true;
    }
    if (row.vacuous) {
      ++out.excluded;
      continue;
    }
    if (std::isfinite(row.ratio_low) && row.ratio_low > 0.0) {
      out.low_min = low_any ? std::min(out.low_min, row.ratio_low) : row.ratio_low;
      out.low_max = low_any ? std::max(out.low_max, row.ratio_low) : row.ratio_low;
      low_any = true;
    }
  }
  if (low_any) out.low_dispersion = out.low_max / out.low_min;
  if (up_any) out.up_dispersion = out.up_max / out.up_min;
  return out;
}

}  // namespace gapfield
