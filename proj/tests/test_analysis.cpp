#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gapfield/analysis.hpp"
#include "gapfield/common.hpp"

using namespace gapfield;

namespace {

TwoDiskGeometry unit_pair(double eps, Conductivity k1, Conductivity k2) {
  return TwoDiskGeometry::canonical(1.0, 1.0, eps, k1, k2);
}

FourierCoeffs affine_dirichlet_data(double rho, const Vec2& a) {
  FourierCoeffs f;
  f.ac = {rho * a.x()};
  f.as = {rho * a.y()};
  return f;
}

FourierCoeffs affine_neumann_data(const Vec2& a) {
  FourierCoeffs g;
  g.ac = {a.x()};
  g.as = {a.y()};
  return g;
}

SweepRow synthetic_row(double eps, double grad) {
  SweepRow row;
  row.eps = eps;
  row.grad_x1 = grad;
  return row;
}

}  // namespace

TEST_CASE("touching conductors at unit radius pin the lower factor at 100") {
  const auto geo = unit_pair(1e-4, Conductivity::perfectly_conducting(),
                             Conductivity::perfectly_conducting());
  const auto bf = bound_factors(geo, HarmonicField::affine(Vec2(1.0, 0.0)));
  // tau = 1 and r_*/r_min = 1, so the denominator is exactly sqrt(eps)
  CHECK(bf.lower_factor == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bf.upper_factor == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(bf.regime_met);
  CHECK_FALSE(bf.tangential);
  CHECK_FALSE(bf.vacuous);
}

TEST_CASE("moderate contrast reproduces the hand-computed factor") {
  const auto geo =
      unit_pair(1e-4, Conductivity::finite(5.0), Conductivity::finite(5.0));
  const auto bf = bound_factors(geo, HarmonicField::affine(Vec2(1.0, 0.0)));
  // sigma = 2/3 each, tau = 4/9, denominator 5/9 + 0.01
  CHECK(bf.lower_factor == doctest::Approx(1.0 / (5.0 / 9.0 + 0.01)).epsilon(1e-12));
  CHECK(bf.upper_factor == doctest::Approx(1.0 / (5.0 / 9.0 + 0.01)).epsilon(1e-12));
}

TEST_CASE("the Dirichlet factor matches its closed-form value") {
  const auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 1e-4,
                                                 Conductivity::perfectly_conducting());
  const auto bf = bound_factors(geo, affine_dirichlet_data(2.0, Vec2(1.0, 0.0)), false);
  // sigma = 1 and r^ = sqrt(1/2): denominator 4 sqrt(1/2) 0.01
  CHECK(bf.lower_factor ==
        doctest::Approx(1.0 / (4.0 * std::sqrt(0.5) * 0.01)).epsilon(1e-12));
  CHECK(bf.upper_factor == doctest::Approx(1.0 / (std::sqrt(0.5) * 0.01)).epsilon(1e-12));
  CHECK(bf.regime_met);
}

TEST_CASE("flux factors mirror Dirichlet factors under conductivity inversion") {
  const FourierCoeffs data = affine_dirichlet_data(2.0, Vec2(0.7, 0.2));
  // inverting a finite contrast flips sigma up to one rounding of 1/k
  for (const double k : {5.0, 0.2, 37.0}) {
    for (const double eps : {1e-2, 1e-4}) {
      const Conductivity kd = Conductivity::finite(k);
      const auto geo_d = DiskInDiskGeometry::canonical(2.0, 1.0, eps, kd);
      const auto geo_n = DiskInDiskGeometry::canonical(2.0, 1.0, eps, kd.reciprocal());
      const auto bd = bound_factors(geo_d, data, false);
      const auto bn = bound_factors(geo_n, data, true);
      CHECK(bd.lower_factor == doctest::Approx(bn.lower_factor).epsilon(1e-14));
      CHECK(bd.upper_factor == doctest::Approx(bn.upper_factor).epsilon(1e-14));
    }
  }
  // the degenerate tags flip exactly, so those factors match bit for bit
  const auto geo_pc =
      DiskInDiskGeometry::canonical(2.0, 1.0, 1e-3, Conductivity::perfectly_conducting());
  const auto geo_ins =
      DiskInDiskGeometry::canonical(2.0, 1.0, 1e-3, Conductivity::insulating());
  const auto bpc = bound_factors(geo_pc, data, false);
  const auto bins = bound_factors(geo_ins, data, true);
  CHECK(bpc.lower_factor == bins.lower_factor);
  CHECK(bpc.upper_factor == bins.upper_factor);
}

TEST_CASE("factors shrink as the gap widens") {
  const std::vector<double> eps = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  const HarmonicField h = HarmonicField::affine(Vec2(1.0, 0.0));
  const FourierCoeffs f = affine_dirichlet_data(2.0, Vec2(1.0, 0.0));
  double prev_low = 0.0, prev_up = 0.0;
  double prev_dlow = 0.0, prev_nlow = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto bf = bound_factors(
        unit_pair(eps[i], Conductivity::finite(8.0), Conductivity::finite(3.0)), h);
    const auto bd = bound_factors(
        DiskInDiskGeometry::canonical(2.0, 1.0, eps[i], Conductivity::finite(8.0)), f,
        false);
    const auto bn = bound_factors(
        DiskInDiskGeometry::canonical(2.0, 1.0, eps[i], Conductivity::finite(0.2)), f,
        true);
    if (i > 0) {
      CHECK(bf.lower_factor < prev_low);
      CHECK(bf.upper_factor < prev_up);
      CHECK(bd.lower_factor < prev_dlow);
      CHECK(bn.lower_factor < prev_nlow);
    }
    prev_low = bf.lower_factor;
    prev_up = bf.upper_factor;
    prev_dlow = bd.lower_factor;
    prev_nlow = bn.lower_factor;
  }
}

TEST_CASE("the projection direction follows the conductivity regime") {
  const HarmonicField h = HarmonicField::affine(Vec2(0.3, 0.9));

  const auto conducting =
      bound_factors(unit_pair(0.01, Conductivity::finite(5.0), Conductivity::finite(2.0)), h);
  CHECK_FALSE(conducting.tangential);
  CHECK(conducting.regime_met);
  // constant gradient: the normal projection is |a_x| at both points
  CHECK(conducting.inf_term1 == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(conducting.inf_term2 == doctest::Approx(0.3).epsilon(1e-14));

  const auto resistive =
      bound_factors(unit_pair(0.01, Conductivity::finite(0.5), Conductivity::finite(0.1)), h);
  CHECK(resistive.tangential);
  CHECK(resistive.regime_met);
  CHECK(resistive.inf_term1 == doctest::Approx(0.9).epsilon(1e-14));

  const auto mixed =
      bound_factors(unit_pair(0.01, Conductivity::finite(5.0), Conductivity::finite(0.1)), h);
  CHECK_FALSE(mixed.regime_met);
  CHECK_FALSE(mixed.tangential);
}

TEST_CASE("a driver orthogonal to the gap axis makes the lower estimate vacuous") {
  const auto geo = unit_pair(0.01, Conductivity::finite(5.0), Conductivity::finite(5.0));
  const auto bf = bound_factors(geo, HarmonicField::affine(Vec2(0.0, 1.0)));
  CHECK(bf.vacuous);
  CHECK(bf.inf_term1 == 0.0);
  CHECK(bf.lower_factor > 0.0);
}

TEST_CASE("affine data layers reproduce their interior closed forms") {
  const double rho = 2.0;
  const Vec2 a(0.6, 0.8);

  // Dirichlet data a . X: the double layer is a . X / 2 inside, so the normal
  // projection on the inner segment is |a_x| / 2.
  const auto geo_d =
      DiskInDiskGeometry::canonical(rho, 1.0, 1e-6, Conductivity::finite(10.0));
  const auto bd = bound_factors(geo_d, affine_dirichlet_data(rho, a), false);
  CHECK(bd.inf_term1 == doctest::Approx(0.3).epsilon(1e-12));
  // outside the domain the layer decays; at a hairline gap the outer segment
  // collapses onto the boundary where the projection is also |a_x| / 2
  CHECK(bd.inf_term2 == doctest::Approx(0.3).epsilon(2e-2));

  // flux data a . nu: the single layer is -a . X / 2 + const inside, so the
  // tangential projection is |a_y| / 2.
  const auto geo_n =
      DiskInDiskGeometry::canonical(rho, 1.0, 1e-6, Conductivity::finite(0.1));
  const auto bn = bound_factors(geo_n, affine_neumann_data(a), true);
  CHECK(bn.inf_term1 == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("node selection grows toward small gaps and respects overrides") {
  CHECK(auto_nodes(1e-2, 1.0) == 256);
  CHECK(auto_nodes(1e-3, 1.0) == 256);
  CHECK(auto_nodes(1e-4, 1.0) == 1024);
  CHECK(auto_nodes(1e-5, 1.0) == 2048);
  CHECK(auto_nodes(1e-7, 1.0) == 2048);

  TwoDiskSweepSpec spec;
  spec.eps = {0.5};
  spec.ks = {{Conductivity::finite(2.0), Conductivity::finite(2.0)}};
  spec.driver = HarmonicField::affine(Vec2(1.0, 0.0));
  spec.opts.nodes = 64;
  const auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 1);
  CHECK(rep.rows[0].nodes == 64);
}

TEST_CASE("a trivial pair sweeps to the exact driver row") {
  TwoDiskSweepSpec spec;
  spec.eps = {0.5};
  spec.ks = {{Conductivity::finite(1.0), Conductivity::finite(1.0)}};
  spec.driver = HarmonicField::affine(Vec2(1.0, 0.0));
  const auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 1);
  const SweepRow& row = rep.rows[0];
  CHECK_FALSE(row.failed);
  CHECK(row.grad_x1 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(row.grad_x2 == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(row.sup_norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(row.k1 == 1.0);
  CHECK(row.nodes == 256);
  CHECK(row.ratio_low > 0.0);
  CHECK(row.ratio_up > 0.0);
  CHECK_FALSE(row.vacuous);
}

TEST_CASE("sweep rows arrive sorted with the gap profile at the smallest gap") {
  TwoDiskSweepSpec spec;
  spec.eps = {1e-1, 1e-2};
  spec.ks = {{Conductivity::perfectly_conducting(), Conductivity::perfectly_conducting()}};
  spec.driver = HarmonicField::affine(Vec2(1.0, 0.0));
  const auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].eps == 1e-2);
  CHECK(rep.rows[1].eps == 1e-1);
  CHECK(rep.rows[0].grad_x1 > rep.rows[1].grad_x1);
  CHECK(rep.gap_eps == 1e-2);
  REQUIRE(rep.gap_profile.size() == 64);
  for (const GapSample& gs : rep.gap_profile) {
    CHECK(gs.t > 0.0);
    CHECK(gs.t < 1e-2);
    CHECK(gs.magnitude > 0.0);
  }
  for (const SweepRow& row : rep.rows) {
    CHECK_FALSE(row.failed);
    CHECK(row.terms_used > 0);
    CHECK(row.ratio_low > 0.0);
    CHECK(std::isfinite(row.ratio_up));
  }
}

TEST_CASE("a bad gap value fails its row without aborting the sweep") {
  TwoDiskSweepSpec spec;
  spec.eps = {0.1, -1.0};
  spec.ks = {{Conductivity::finite(2.0), Conductivity::finite(2.0)}};
  spec.driver = HarmonicField::affine(Vec2(1.0, 0.0));
  const auto rep = sweep(spec);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].failed);
  CHECK_FALSE(rep.rows[0].error.empty());
  CHECK_FALSE(rep.rows[1].failed);
  CHECK(rep.rows[1].grad_x1 > 0.0);
}

TEST_CASE("bounded-domain sweeps solve both data types") {
  DiskInDiskSweepSpec spec;
  spec.rho = 2.0;
  spec.r = 1.0;
  spec.eps = {1e-2};
  spec.ks = {Conductivity::perfectly_conducting()};
  spec.data = affine_dirichlet_data(2.0, Vec2(1.0, 0.0));
  const auto rep_d = sweep(spec);
  REQUIRE(rep_d.rows.size() == 1);
  CHECK(rep_d.kind == ProblemKind::Dirichlet);
  CHECK_FALSE(rep_d.rows[0].failed);
  CHECK(rep_d.rows[0].grad_x1 > 0.0);
  CHECK(rep_d.rows[0].grad_x2 > 0.0);
  CHECK(rep_d.rows[0].k2 == 1.0);
  CHECK_FALSE(rep_d.rows[0].vacuous);
  CHECK(rep_d.gap_profile.size() == 64);

  DiskInDiskSweepSpec nspec;
  nspec.rho = 2.0;
  nspec.r = 1.0;
  nspec.neumann = true;
  nspec.eps = {1e-2};
  nspec.ks = {Conductivity::insulating()};
  nspec.data = affine_neumann_data(Vec2(1.0, 0.0));
  const auto rep_n = sweep(nspec);
  REQUIRE(rep_n.rows.size() == 1);
  CHECK(rep_n.kind == ProblemKind::Neumann);
  CHECK_FALSE(rep_n.rows[0].failed);
  CHECK(rep_n.rows[0].grad_x1 > 0.0);
  CHECK(rep_n.rows[0].k1 == 0.0);
}

TEST_CASE("a synthetic square-root law fits to slope exactly minus one half") {
  SweepReport rep;
  for (const double e : {1e-5, 1e-4, 1e-3, 1e-2})
    rep.rows.push_back(synthetic_row(e, 3.0 / std::sqrt(e)));
  const RateFit fit = fit_blowup_rate(rep);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-10));
  CHECK(fit.stderr_slope < 1e-12);
  CHECK(fit.max_residual < 1e-12);
  CHECK(fit.rows_used == 4);
}

TEST_CASE("rate fitting skips failed rows and demands a usable span") {
  SweepReport rep;
  for (const double e : {1e-4, 1e-3, 1e-2})
    rep.rows.push_back(synthetic_row(e, 1.0 / std::sqrt(e)));
  CHECK_THROWS_AS(fit_blowup_rate(rep), ConfigError);

  rep.rows.push_back(synthetic_row(1e-1, 1.0 / std::sqrt(1e-1)));
  CHECK_NOTHROW(fit_blowup_rate(rep));

  SweepRow bad = synthetic_row(1e-5, 1e9);
  bad.failed = true;
  rep.rows.push_back(bad);
  const RateFit fit = fit_blowup_rate(rep);
  CHECK(fit.rows_used == 4);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));

  SweepReport narrow;
  for (const double e : {1e-2, 2e-2, 4e-2, 8e-2})
    narrow.rows.push_back(synthetic_row(e, 1.0 / std::sqrt(e)));
  CHECK_THROWS_AS(fit_blowup_rate(narrow), ConfigError);
}

TEST_CASE("the sandwich summary tracks ratio spreads and exclusions") {
  SweepReport rep;
  SweepRow a = synthetic_row(1e-2, 1.0);
  a.ratio_low = 0.5;
  a.ratio_up = 1.0;
  SweepRow b = synthetic_row(1e-3, 1.0);
  b.ratio_low = 1.0;
  b.ratio_up = 2.0;
  SweepRow c = synthetic_row(1e-4, 1.0);
  c.ratio_low = 2.0;
  c.ratio_up = 4.0;
  SweepRow v = synthetic_row(1e-5, 1.0);
  v.vacuous = true;
  v.ratio_low = 0.0;
  v.ratio_up = 8.0;
  rep.rows = {a, b, c, v};

  const SandwichResult res = sandwich_check(rep);
  CHECK(res.low_min == 0.5);
  CHECK(res.low_max == 2.0);
  CHECK(res.low_dispersion == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(res.up_min == 1.0);
  CHECK(res.up_max == 8.0);
  CHECK(res.up_dispersion == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(res.rows_used == 4);
  CHECK(res.excluded == 1);

  SweepReport single;
  single.rows = {a};
  const SandwichResult one = sandwich_check(single);
  CHECK(one.low_dispersion == 1.0);
  CHECK(one.up_dispersion == 1.0);
}
