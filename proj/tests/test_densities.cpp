#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gapfield/densities.hpp"

using namespace gapfield;

namespace {

HarmonicField affine_x() { return HarmonicField::affine(Vec2(1.0, 0.0)); }

TwoDiskGeometry two_disks(double r1, double r2, double eps, Conductivity k1,
                          Conductivity k2) {
  return TwoDiskGeometry::canonical(r1, r2, eps, k1, k2);
}

// Accumulated pair ratios along an alternating orbit: the assumptions the
// truncation certificate rests on, checked directly.
struct RatioProbe {
  double max_over_one = -1.0;   // max(pair ratio - 1)
  int cross = -1;               // first pair with ratio <= cap
  double worst_after = 0.0;     // max ratio/cap after the crossing
};

RatioProbe probe_orbit(const Disk& a, const Disk& b, const Vec2& start,
                       bool lead_b, double cap, int pairs) {
  RatioProbe r;
  ReflectionOrbit orb(start);
  if (lead_b) orb.step(b);
  double prev = orb.gprod;
  for (int m = 0; m < pairs && orb.gprod > 1e-200; ++m) {
    orb.step(a);
    orb.step(b);
    const double ratio = orb.gprod / prev;
    r.max_over_one = std::max(r.max_over_one, ratio - 1.0);
    if (r.cross < 0 && ratio <= cap) r.cross = m;
    if (r.cross >= 0 && m > r.cross)
      r.worst_after = std::max(r.worst_after, ratio / cap);
    prev = orb.gprod;
  }
  return r;
}

// Same thing for the distance between a point orbit and its anchor orbit,
// which controls the value-series terms. The cutoff is far above the
// cancellation floor of the difference (~1e-16 at unit scale): below it the
// computed ratios are quantization noise, not geometry.
RatioProbe probe_value_orbit(const Disk& a, const Disk& b, const Vec2& start,
                             const Vec2& anchor, bool lead_b, double cap,
                             int pairs) {
  RatioProbe r;
  ReflectionOrbit pt(start);
  if (lead_b) pt.step(b);
  ReflectionOrbit an(anchor);
  double prev = (pt.y - an.y).norm();
  for (int m = 0; m < pairs && prev > 1e-11; ++m) {
    pt.step(a);
    pt.step(b);
    an.step(a);
    an.step(b);
    const double dist = (pt.y - an.y).norm();
    const double ratio = dist / prev;
    r.max_over_one = std::max(r.max_over_one, ratio - 1.0);
    if (r.cross < 0 && ratio <= cap) r.cross = m;
    if (r.cross >= 0 && m > r.cross)
      r.worst_after = std::max(r.worst_after, ratio / cap);
    prev = dist;
  }
  return r;
}

double raw_grid_mean(const BoundaryGrid& g, const std::function<double(const Vec2&)>& f) {
  double s = 0.0;
  for (int j = 0; j < g.m; ++j) s += f(g.node(j));
  return s / g.m;
}

}  // namespace

TEST_CASE("trivial inclusions couple with exactly zero strength") {
  for (double k2 : {1.0, 1.0 + 5e-9, 1.0 - 5e-9}) {
    auto geo = two_disks(1.0, 0.8, 0.3, Conductivity::finite(5.0),
                         Conductivity::finite(k2));
    TwoDiskSeries s(geo, affine_x());
    CHECK(s.sigma(2) == 0.0);
    CHECK(s.tau() == 0.0);
    for (double th : {0.0, 0.7, 2.1, 4.4}) {
      const Vec2 x1 = geo.b1.point_at(th);
      CHECK(s.psi(1, x1) == doctest::Approx(geo.b1.normal_at(x1).x()).epsilon(1e-15));
      CHECK(s.phi(2, geo.b2.point_at(th)) == 0.0);
    }
    CHECK(s.layer_value(2, Vec2(5.0, 1.0)) == 0.0);
    CHECK(s.layer_grad(2, Vec2(5.0, 1.0)).norm() == 0.0);
  }
}

TEST_CASE("single active inclusion reproduces the closed-form layer") {
  const double k = 5.0, sig = (k - 1.0) / (k + 1.0);
  const Vec2 A(0.8, -0.6);
  auto geo = two_disks(1.3, 0.5, 0.4, Conductivity::finite(k),
                       Conductivity::finite(1.0));
  TwoDiskSeries s(geo, HarmonicField::affine(A));

  // density 2 sigma A.nu is a pure first mode on the circle
  FourierCoeffs density{0.0, {2.0 * sig * A.x()}, {2.0 * sig * A.y()}};
  const CircleHarmonics ch = single_layer_closed_form(geo.b1, density);

  for (const Vec2& x : {Vec2(2.0, 0.9), Vec2(-1.5, -0.2), Vec2(0.4, 1.9),
                        Vec2(1.3, 0.0), Vec2(6.0, -4.0)}) {
    CAPTURE(x.x());
    CAPTURE(x.y());
    CHECK(s.layer_value(1, x) ==
          doctest::Approx(ch.eval_outside(x)).epsilon(1e-12));
    const Vec2 g0 = ch.grad_outside(x);
    const Vec2 g1 = s.layer_grad(1, x);
    CHECK((g1 - g0).norm() <= 1e-12 * (1.0 + g0.norm()));
  }
  for (double th : {0.3, 1.9, 5.0}) {
    const Vec2 x = geo.b1.point_at(th);
    CHECK(s.psi(1, x) == doctest::Approx(A.dot(geo.b1.normal_at(x))).epsilon(1e-14));
    CHECK(s.phi(1, x) ==
          doctest::Approx(2.0 * sig * A.dot(geo.b1.normal_at(x))).epsilon(1e-14));
  }
}

TEST_CASE("an inactive partner leaves exactly one reflection correction") {
  auto geo = two_disks(1.0, 0.9, 0.25, Conductivity::finite(4.0),
                       Conductivity::finite(1.0));
  const double sig1 = 3.0 / 5.0;
  HarmonicField h =
      HarmonicField::sum({HarmonicField::affine(Vec2(1.0, 0.4)),
                          HarmonicField::poly(Vec2(0.3, -0.2), 2, Cplx(0.2, 0.1))});
  TwoDiskSeries s(geo, h);
  for (double th : {0.0, 1.1, 2.9, 4.0}) {
    const Vec2 x = geo.b2.point_at(th);
    const Vec2 nu = geo.b2.normal_at(x);
    ReflectionOrbit orb(x);
    orb.step(geo.b1);
    const double expected =
        h.grad(x).dot(nu) - sig1 * (orb.jac.transpose() * h.grad(orb.y)).dot(nu);
    CHECK(s.psi(2, x) == doctest::Approx(expected).epsilon(1e-14));
  }
}

TEST_CASE("orbit pair ratios stay inside the certified envelope") {
  // two disks: every pair product shrinks, and once a pair ratio falls below
  // b^2 it never climbs back above it
  for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}) {
    for (double r2 : {1.0, 0.4, 2.5}) {
      auto geo = two_disks(1.0, r2, eps, Conductivity::finite(5.0),
                           Conductivity::finite(5.0));
      const auto sc = derived_scalars(geo);
      const double cap = sc.b * sc.b;
      const int pairs = 4 * sc.N + 3000;
      for (double th : {0.0, 0.3, 1.2, 2.6, 3.14159}) {
        CAPTURE(eps);
        CAPTURE(r2);
        CAPTURE(th);
        const auto p =
            probe_orbit(geo.b2, geo.b1, geo.b1.point_at(th), false, cap, pairs);
        CHECK(p.max_over_one <= 1e-12);
        CHECK(p.cross >= 0);
        CHECK(p.cross <= 2 * sc.N + 16);
        CHECK(p.worst_after <= 1.0 + 1e-9);
        const auto v = probe_value_orbit(geo.b2, geo.b1, geo.b1.point_at(th),
                                         geo.b1.center, true, cap, pairs);
        CHECK(v.max_over_one <= 1e-12);
        CHECK(v.cross >= 0);
        CHECK(v.worst_after <= 1.0 + 1e-9);
      }
    }
  }
  // disk in disk: same envelope with single-power b, for the density orbit,
  // the outer-boundary orbit, and the anchored value orbit
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5}) {
    for (double r : {1.0, 0.5, 1.7}) {
      auto geo = DiskInDiskGeometry::canonical(2.0, r, eps,
                                               Conductivity::finite(5.0));
      const auto sc = derived_scalars(geo);
      const int pairs = 4 * sc.N + 3000;
      for (double th : {0.0, 0.3, 1.2, 2.6, 3.14159}) {
        CAPTURE(eps);
        CAPTURE(r);
        CAPTURE(th);
        const auto p = probe_orbit(geo.omega(), geo.b, geo.b.point_at(th),
                                   false, sc.b, pairs);
        CHECK(p.max_over_one <= 1e-12);
        CHECK(p.cross >= 0);
        CHECK(p.cross <= 2 * sc.N + 16);
        CHECK(p.worst_after <= 1.0 + 1e-9);
        const auto q = probe_orbit(geo.omega(), geo.b,
                                   geo.omega().point_at(th), true, sc.b, pairs);
        CHECK(q.max_over_one <= 1e-12);
        CHECK(q.cross >= 0);
        CHECK(q.cross <= 2 * sc.N + 16);
        CHECK(q.worst_after <= 1.0 + 1e-9);
        const auto v = probe_value_orbit(geo.omega(), geo.b,
                                         geo.omega().point_at(th),
                                         geo.b.center, true, sc.b, pairs);
        CHECK(v.max_over_one <= 1e-12);
        CHECK(v.cross >= 0);
        CHECK(v.worst_after <= 1.0 + 1e-9);
      }
    }
  }
}

TEST_CASE("on-axis composed map derivative equals the conformal product") {
  auto geo = two_disks(1.0, 0.7, 0.02, Conductivity::finite(3.0),
                       Conductivity::finite(3.0));
  const double h = 1e-7;
  for (int pairs : {1, 3, 10}) {
    auto advance = [&](double t) {
      ReflectionOrbit orb(Vec2(t, 0.0));
      for (int m = 0; m < pairs; ++m) {
        orb.step(geo.b2);
        orb.step(geo.b1);
      }
      return orb;
    };
    const double t0 = geo.b1.radius + 0.4 * geo.eps;
    const auto mid = advance(t0);
    const double fd = (advance(t0 + h).y.x() - advance(t0 - h).y.x()) / (2.0 * h);
    CHECK(std::abs(fd) == doctest::Approx(mid.gprod).epsilon(1e-5));
  }
  auto did = DiskInDiskGeometry::canonical(2.0, 1.0, 0.02,
                                           Conductivity::finite(3.0));
  for (int pairs : {1, 3, 10}) {
    auto advance = [&](double t) {
      ReflectionOrbit orb(Vec2(t, 0.0));
      for (int m = 0; m < pairs; ++m) {
        orb.step(did.omega());
        orb.step(did.b);
      }
      return orb;
    };
    const double t0 = 2.0 - 0.6 * did.eps;
    const auto mid = advance(t0);
    const double fd = (advance(t0 + h).y.x() - advance(t0 - h).y.x()) / (2.0 * h);
    CHECK(std::abs(fd) == doctest::Approx(mid.gprod).epsilon(1e-5));
  }
}

TEST_CASE("two-disk densities satisfy the integral equations") {
  SUBCASE("moderate contrasts") {
    auto geo = two_disks(1.0, 0.7, 0.05, Conductivity::finite(12.0),
                         Conductivity::finite(3.5));
    TwoDiskSeries s(geo, HarmonicField::affine(Vec2(1.0, 0.3)));
    const auto d = two_disk_densities(s, 256);
    CHECK(two_disk_residual(s.driver(), d) <= 1e-8);
  }
  SUBCASE("a resistive inclusion and a polynomial driver") {
    auto geo = two_disks(0.8, 1.3, 0.03, Conductivity::finite(0.2),
                         Conductivity::finite(6.0));
    HarmonicField h = HarmonicField::sum(
        {HarmonicField::affine(Vec2(0.7, -0.4)),
         HarmonicField::poly(Vec2(0.9, 0.3), 2, Cplx(0.25, -0.15))});
    TwoDiskSeries s(geo, h);
    const auto d = two_disk_densities(s, 256);
    CHECK(two_disk_residual(s.driver(), d) <= 1e-8);
  }
  SUBCASE("degenerate pair of opposite type") {
    auto geo = two_disks(1.0, 1.0, 0.02, Conductivity::perfectly_conducting(),
                         Conductivity::insulating());
    TwoDiskSeries s(geo, affine_x());
    CHECK(s.tau() == -1.0);
    const auto d = two_disk_densities(s, 512);
    CHECK(two_disk_residual(s.driver(), d) <= 1e-7);
  }
}

TEST_CASE("density grids are mean-zero") {
  // stored grids carry the exact projection; the raw series means vanish only
  // up to the truncation tolerance (the exact statement is the flux identity)
  auto geo = two_disks(1.0, 0.7, 0.05, Conductivity::finite(12.0),
                       Conductivity::finite(3.5));
  TwoDiskSeries s(geo, HarmonicField::affine(Vec2(1.0, 0.3)));
  const auto d = two_disk_densities(s, 256);
  CHECK(std::abs(d.phi1.mean()) <= 1e-12 * std::max(1.0, d.phi1.cwiseAbs().maxCoeff()));
  CHECK(std::abs(d.phi2.mean()) <= 1e-12 * std::max(1.0, d.phi2.cwiseAbs().maxCoeff()));
  const double raw1 = raw_grid_mean(d.grid1, [&](const Vec2& x) { return s.phi(1, x); });
  const double raw2 = raw_grid_mean(d.grid2, [&](const Vec2& x) { return s.phi(2, x); });
  CHECK(std::abs(raw1) <= 1e-9 * std::max(1.0, d.phi1.cwiseAbs().maxCoeff()));
  CHECK(std::abs(raw2) <= 1e-9 * std::max(1.0, d.phi2.cwiseAbs().maxCoeff()));

  auto did = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                           Conductivity::finite(7.0));
  DiskInDiskSeries sd(did, FourierCoeffs{0.3, {2.0, 0.5}, {-1.0}});
  const auto dd = disk_in_disk_densities(sd, 256, 256);
  CHECK(std::abs(dd.g.mean()) <= 1e-12 * std::max(1.0, dd.g.cwiseAbs().maxCoeff()));
  CHECK(std::abs(dd.phi_b.mean()) <=
        1e-12 * std::max(1.0, dd.phi_b.cwiseAbs().maxCoeff()));
  const double raw_g =
      raw_grid_mean(dd.grid_omega, [&](const Vec2& x) { return sd.g_omega(x); });
  CHECK(std::abs(raw_g) <= 1e-9 * std::max(1.0, dd.g.cwiseAbs().maxCoeff()));
}

TEST_CASE("mirror symmetry swaps the fused densities") {
  auto geo = two_disks(1.0, 1.0, 0.01, Conductivity::finite(7.0),
                       Conductivity::finite(7.0));
  TwoDiskSeries s(geo, affine_x(), 1e-13);
  for (double th : {0.0, 0.5, 1.3, 2.2, 3.0, 4.1, 5.7}) {
    const Vec2 x2 = geo.b2.point_at(th);
    const Vec2 x1 = geo.b1.point_at(kPi - th);
    const double p1 = s.psi(1, x1);
    CHECK(std::abs(s.psi(2, x2) + p1) <= 1e-12 * std::max(1.0, std::abs(p1)));
  }
}

TEST_CASE("disk-in-disk densities satisfy the equations") {
  const FourierCoeffs data{0.3, {2.0, 0.5}, {-1.0}};
  SUBCASE("conducting inclusion") {
    auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                             Conductivity::finite(7.0));
    DiskInDiskSeries s(geo, data);
    const auto d = disk_in_disk_densities(s, 256, 256);
    CHECK(disk_in_disk_residual(geo, data, d) <= 1e-8);
  }
  SUBCASE("resistive inclusion") {
    auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                             Conductivity::finite(0.15));
    DiskInDiskSeries s(geo, data);
    const auto d = disk_in_disk_densities(s, 256, 256);
    CHECK(disk_in_disk_residual(geo, data, d) <= 1e-8);
  }
  SUBCASE("perfectly conducting inclusion") {
    auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.02,
                                             Conductivity::perfectly_conducting());
    DiskInDiskSeries s(geo, data);
    const auto d = disk_in_disk_densities(s, 512, 512);
    CHECK(disk_in_disk_residual(geo, data, d) <= 1e-7);
  }
  SUBCASE("trivial inclusion leaves the harmonic extension") {
    auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                             Conductivity::finite(1.0));
    DiskInDiskSeries s(geo, data);
    const auto d = disk_in_disk_densities(s, 128, 128);
    CHECK(d.phi_b.cwiseAbs().maxCoeff() == 0.0);
    CHECK(disk_in_disk_residual(geo, data, d) <= 1e-10);
  }
}

TEST_CASE("series layers match quadrature away from the grids") {
  const FourierCoeffs data{0.3, {2.0, 0.5}, {-1.0}};
  auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                           Conductivity::finite(7.0));
  DiskInDiskSeries s(geo, data);
  const auto d = disk_in_disk_densities(s, 512, 512);

  const Vec2 zb = geo.b.center;
  for (const Vec2& x :
       {Vec2(-1.2, 0.6), Vec2(0.1, -1.5), Vec2(-0.4, 0.2), Vec2(1.6, 1.0),
        Vec2(zb.x() + 0.3, zb.y() + 0.1), Vec2(zb.x(), zb.y())}) {
    CAPTURE(x.x());
    CAPTURE(x.y());
    const double v_quad = single_layer_eval(d.grid_omega, d.g, x);
    const double v_ser = s.layer_omega_value(x);
    CHECK(std::abs(v_ser - v_quad) <= 1e-8 * (1.0 + std::abs(v_quad)));
    const Vec2 g_quad = single_layer_grad(d.grid_omega, d.g, x);
    const Vec2 g_ser = s.layer_omega_grad(x);
    CHECK((g_ser - g_quad).norm() <= 1e-8 * (1.0 + g_quad.norm()));
  }
  for (const Vec2& x : {Vec2(-1.2, 0.6), Vec2(0.1, -1.5), Vec2(1.96, 0.3),
                        Vec2(0.0, 1.99)}) {
    CAPTURE(x.x());
    CAPTURE(x.y());
    const double v_quad = single_layer_eval(d.grid_b, d.phi_b, x);
    CHECK(std::abs(s.layer_b_value(x) - v_quad) <=
          1e-9 * (1.0 + std::abs(v_quad)));
    const Vec2 g_quad = single_layer_grad(d.grid_b, d.phi_b, x);
    const Vec2 g_ser = s.layer_b_grad(x);
    CHECK((g_ser - g_quad).norm() <= 1e-9 * (1.0 + g_quad.norm()));
  }
}

TEST_CASE("interior and exterior branch series for the outer density agree") {
  const FourierCoeffs data{0.1, {1.5, -0.4}, {0.8}};
  auto geo = DiskInDiskGeometry::canonical(2.0, 1.0, 0.04,
                                           Conductivity::finite(7.0));
  DiskInDiskSeries s(geo, data);
  const CircleHarmonics& dl = s.data_layer();
  for (double th : {0.0, 0.9, 1.7, 2.8, 3.9, 5.2}) {
    const Vec2 x = geo.omega().point_at(th);
    const Vec2 nu = geo.omega().normal_at(x);
    double alt = 2.0 * dl.grad_inside(x).dot(nu);
    ReflectionOrbit orb(x);
    double sm = 1.0;
    for (int m = 1; m <= 240; ++m) {
      orb.step(geo.b);
      orb.step(geo.omega());
      sm *= s.sigma();
      alt += 4.0 * sm * (orb.jac.transpose() * dl.grad_outside(orb.y)).dot(nu);
    }
    CHECK(s.g_omega(x) == doctest::Approx(alt).epsilon(1e-10));
  }
}

TEST_CASE("truncation records reflect the stop path and bound the error") {
  SUBCASE("geometric stop well before the gap threshold") {
    auto geo = two_disks(1.0, 0.7, 1e-3, Conductivity::finite(12.0),
                         Conductivity::finite(3.5));
    TwoDiskSeries s(geo, affine_x());
    TwoDiskSeries tight(geo, affine_x(), 1e-14);
    SeriesTruncation tr;
    const double val = s.psi(1, geo.b1.point_at(0.0), &tr);
    CHECK(tr.early);
    CHECK(tr.terms >= 2);
    CHECK(tr.terms < tr.threshold / 2);
    CHECK(tr.tail > 0.0);
    CHECK(tr.tol == 1e-10);
    CHECK(std::abs(val - tight.psi(1, geo.b1.point_at(0.0))) <=
          1.01 * tr.tail + 1e-11);
  }
  SUBCASE("degenerate coupling converges at the near-gap contraction rate") {
    auto geo = two_disks(1.0, 1.0, 1e-3, Conductivity::perfectly_conducting(),
                         Conductivity::insulating());
    TwoDiskSeries s(geo, affine_x());
    TwoDiskSeries tight(geo, affine_x(), 1e-13);
    SeriesTruncation tr;
    const double val = s.psi(1, geo.b1.point_at(0.0), &tr);
    CHECK(tr.early == (tr.terms <= tr.threshold));
    CHECK(tr.terms > 100);
    CHECK(tr.tail <= 1.001 * 1e-10 * std::max(1.0, std::abs(val)));
    CHECK(std::abs(val - tight.psi(1, geo.b1.point_at(0.0))) <=
          1.01 * tr.tail + 1e-11);
  }
}

TEST_CASE("construction and domain guards") {
  CHECK_THROWS_AS(TwoDiskSeries(two_disks(1.0, 1.0, 1e-10,
                                          Conductivity::perfectly_conducting(),
                                          Conductivity::perfectly_conducting()),
                                affine_x()),
                  NumericalError);
  auto geo = two_disks(1.0, 0.8, 0.2, Conductivity::finite(3.0),
                       Conductivity::finite(2.0));
  CHECK_THROWS_AS(TwoDiskSeries(geo, affine_x(), 0.0), ConfigError);
  TwoDiskSeries s(geo, affine_x());
  CHECK_THROWS_AS(s.psi(3, Vec2(1.0, 0.0)), ConfigError);
  CHECK_THROWS_AS(s.layer_value(1, Vec2(0.1, 0.0)), DomainError);
  CHECK_THROWS_AS(s.layer_grad(2, geo.b2.center), DomainError);

  auto did = DiskInDiskGeometry::canonical(2.0, 1.0, 0.05,
                                           Conductivity::finite(4.0));
  DiskInDiskSeries sd(did, FourierCoeffs{0.0, {1.0}, {}});
  CHECK_THROWS_AS(sd.layer_b_value(did.b.center), DomainError);
  CHECK_THROWS_AS(sd.layer_omega_value(Vec2(3.0, 0.0)), DomainError);
  CHECK_THROWS_AS(
      DiskInDiskSeries(DiskInDiskGeometry::canonical(
                           2.0, 1.0, 1e-10, Conductivity::insulating()),
                       FourierCoeffs{0.0, {1.0}, {}}),
      NumericalError);
}

TEST_CASE("layer potentials decay at infinity") {
  auto geo = two_disks(1.0, 0.7, 0.05, Conductivity::finite(12.0),
                       Conductivity::finite(3.5));
  TwoDiskSeries s(geo, HarmonicField::affine(Vec2(1.0, 0.3)));
  const double v4 = s.layer_value(1, Vec2(1e4, 3.0));
  const double v5 = s.layer_value(1, Vec2(1e5, 30.0));
  CHECK(std::abs(v4) <= 1e-3);
  CHECK(std::abs(v5) <= 1.5 * std::abs(v4) / 10.0);
  CHECK(std::abs(v5) >= std::abs(v4) / 10.0 / 1.5);
}
