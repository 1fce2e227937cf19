#include "gapfield/geometry.hpp"

#include <cmath>
#include <limits>

namespace gapfield {

Vec2 reflect(const Disk& d, const Vec2& x) {
  const Vec2 w = x - d.center;
  const double n2 = w.squaredNorm();
  if (!(n2 > d.radius * d.radius * 1e-300)) {
    throw DomainError("reflection undefined at the disk center", x);
  }
  return d.center + (d.radius * d.radius / n2) * w;
}

double conformal_factor(const Disk& d, const Vec2& x) {
  const double n2 = (x - d.center).squaredNorm();
  if (!(n2 > d.radius * d.radius * 1e-300)) {
    throw DomainError("conformal factor undefined at the disk center", x);
  }
  return d.radius * d.radius / n2;
}

Mat2 reflection_jacobian(const Disk& d, const Vec2& x) {
  const Vec2 w = x - d.center;
  const double n2 = w.squaredNorm();
  if (!(n2 > d.radius * d.radius * 1e-300)) {
    throw DomainError("reflection Jacobian undefined at the disk center", x);
  }
  const double g = d.radius * d.radius / n2;
  const double nx = w.x() * w.x() / n2, ny = w.y() * w.y() / n2,
               nxy = w.x() * w.y() / n2;
  Mat2 j;
  j << g * (1.0 - 2.0 * nx), -2.0 * g * nxy, -2.0 * g * nxy, g * (1.0 - 2.0 * ny);
  return j;
}

Conductivity Conductivity::finite(double k) {
  if (std::isinf(k) && k > 0.0) return perfectly_conducting();
  if (k == 0.0) return insulating();
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw ConfigError("conductivity must be a finite k >= 0 or +inf");
  }
  return {Kind::Finite, k};
}

double Conductivity::sigma() const {
  switch (kind) {
    case Kind::PerfectlyConducting: return 1.0;
    case Kind::Insulating: return -1.0;
    case Kind::Finite: return (value - 1.0) / (value + 1.0);
  }
  return 0.0;
}

double Conductivity::lambda() const {
  switch (kind) {
    case Kind::PerfectlyConducting: return 0.5;
    case Kind::Insulating: return -0.5;
    case Kind::Finite:
      if (value == 1.0) return std::numeric_limits<double>::infinity();
      return (value + 1.0) / (2.0 * (value - 1.0));
  }
  return 0.0;
}

bool Conductivity::is_trivial() const {
  return kind == Kind::Finite && std::abs(value - 1.0) <= 1e-8;
}

Conductivity Conductivity::reciprocal() const {
  switch (kind) {
    case Kind::PerfectlyConducting: return insulating();
    case Kind::Insulating: return perfectly_conducting();
    case Kind::Finite: return finite(1.0 / value);
  }
  return *this;
}

namespace {

void check_radius(double r, const char* what) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw ConfigError(std::string(what) + " must be positive and finite");
  }
}

void check_declared_eps(double eps, std::optional<double> declared) {
  if (!declared) return;
  const double scale = std::max(std::abs(eps), std::abs(*declared));
  if (std::abs(eps - *declared) > 1e-12 * scale) {
    throw ConfigError("declared eps disagrees with the gap recomputed from the centers");
  }
}

// Roots of A x^2 + B x + C with B < 0, avoiding cancellation.
std::pair<double, double> stable_quadratic(double A, double B, double C) {
  const double disc = B * B - 4.0 * A * C;
  if (!(disc >= 0.0)) throw NumericalError("fixed-point quadratic has no real roots");
  const double q = 0.5 * (-B + std::sqrt(disc));
  const double ra = C / q, rb = q / A;
  return ra < rb ? std::make_pair(ra, rb) : std::make_pair(rb, ra);
}

}  // namespace

TwoDiskGeometry TwoDiskGeometry::canonical(double r1, double r2, double eps,
                                           Conductivity k1, Conductivity k2) {
  check_radius(r1, "r1");
  check_radius(r2, "r2");
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be strictly positive (disks must not touch)");
  }
  TwoDiskGeometry g;
  g.b1 = Disk{{0.0, 0.0}, r1};
  g.b2 = Disk{{r1 + r2 + eps, 0.0}, r2};
  g.k1 = k1;
  g.k2 = k2;
  g.eps = eps;
  return g;
}

TwoDiskGeometry TwoDiskGeometry::from_centers(const Vec2& c1, double r1, const Vec2& c2,
                                              double r2, Conductivity k1, Conductivity k2,
                                              std::optional<double> eps_declared) {
  check_radius(r1, "r1");
  check_radius(r2, "r2");
  const Vec2 d = c2 - c1;
  const double dist = d.norm();
  const double eps = dist - r1 - r2;
  if (!(eps > 0.0)) throw ConfigError("disks must be disjoint: |Z2-Z1| > r1 + r2");
  check_declared_eps(eps, eps_declared);
  TwoDiskGeometry g = canonical(r1, r2, eps, k1, k2);
  g.frame = Frame{d.x() / dist, d.y() / dist, c1};
  return g;
}

DiskInDiskGeometry DiskInDiskGeometry::canonical(double rho, double r, double eps,
                                                 Conductivity k, double guard) {
  check_radius(rho, "rho");
  check_radius(r, "r");
  if (!(r < rho)) throw ConfigError("inclusion radius must satisfy r < rho");
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ConfigError("eps must be strictly positive (inclusion must not touch the boundary)");
  }
  if (!(guard >= 1.0)) throw ConfigError("guard must be at least 1");
  if (!(eps * guard <= rho - r)) {
    throw ConfigError("eps must be small next to the annular thickness: eps*guard <= rho-r");
  }
  DiskInDiskGeometry g;
  g.rho = rho;
  g.b = Disk{{rho - r - eps, 0.0}, r};
  g.k = k;
  g.eps = eps;
  return g;
}

DiskInDiskGeometry DiskInDiskGeometry::from_centers(const Vec2& c_omega, double rho,
                                                    const Vec2& c_b, double r,
                                                    Conductivity k,
                                                    std::optional<double> eps_declared,
                                                    double guard) {
  check_radius(rho, "rho");
  check_radius(r, "r");
  const Vec2 d = c_b - c_omega;
  const double dist = d.norm();
  const double eps = rho - r - dist;
  if (!(eps > 0.0)) throw ConfigError("inclusion must lie strictly inside the domain");
  check_declared_eps(eps, eps_declared);
  DiskInDiskGeometry g = canonical(rho, r, eps, k, guard);
  if (dist > 0.0) g.frame = Frame{d.x() / dist, d.y() / dist, c_omega};
  else g.frame = Frame{1.0, 0.0, c_omega};
  return g;
}

DerivedScalars derived_scalars(const TwoDiskGeometry& g) {
  DerivedScalars s;
  s.sigma1 = g.k1.sigma();
  s.sigma2 = g.k2.sigma();
  s.lambda1 = g.k1.lambda();
  s.lambda2 = g.k2.lambda();
  s.tau = s.sigma1 * s.sigma2;
  const double r1 = g.b1.radius, r2 = g.b2.radius;
  s.r_min = std::min(r1, r2);
  s.r_max = std::max(r1, r2);
  s.r_star = std::sqrt(2.0 * r1 * r2 / (r1 + r2));
  const double se = std::sqrt(g.eps);
  s.a = 1.0 / (1.0 + 2.0 * (s.r_star / s.r_min) * se);
  s.b = 1.0 / (1.0 + (s.r_star / s.r_max) * se);
  s.N = static_cast<int>(std::floor(8.0 * s.r_star / se)) + 1;
  return s;
}

DerivedScalars derived_scalars(const DiskInDiskGeometry& g) {
  DerivedScalars s;
  s.sigma = g.k.sigma();
  s.lambda = g.k.lambda();
  const double r = g.b.radius;
  s.r_star_hat = std::sqrt((g.rho - r) / (g.rho * r));
  const double se = std::sqrt(g.eps);
  s.a = 1.0 / (1.0 + 4.0 * s.r_star_hat * se);
  s.b = 1.0 / (1.0 + s.r_star_hat * se);
  s.N = static_cast<int>(std::floor(1.0 / (4.0 * s.r_star_hat * se))) + 1;
  return s;
}

std::pair<double, double> fixed_points(const TwoDiskGeometry& g) {
  const double r1 = g.b1.radius, r2 = g.b2.radius;
  const double d = r1 + r2 + g.eps;
  return stable_quadratic(d, r2 * r2 - r1 * r1 - d * d, r1 * r1 * d);
}

std::pair<double, double> fixed_points(const DiskInDiskGeometry& g) {
  const double r = g.b.radius, rho = g.rho;
  const double m = rho - r - g.eps;
  return stable_quadratic(m, r * r - rho * rho - m * m, rho * rho * m);
}

CriticalGeometry critical_geometry(const TwoDiskGeometry& g) {
  CriticalGeometry c;
  const auto [x1, x2] = fixed_points(g);
  c.x1 = x1;
  c.x2 = x2;
  c.X1 = Vec2(g.b1.radius, 0.0);
  c.X2 = Vec2(g.b1.radius + g.eps, 0.0);
  c.P1 = Vec2(x1, 0.0);
  c.P2 = Vec2(x2, 0.0);
  c.seg1_a = c.P1;
  c.seg1_b = c.P2;
  c.has_seg2 = false;
  return c;
}

CriticalGeometry critical_geometry(const DiskInDiskGeometry& g) {
  CriticalGeometry c;
  const auto [x1, x2] = fixed_points(g);
  c.x1 = x1;
  c.x2 = x2;
  c.X1 = Vec2(g.rho - g.eps, 0.0);  // on the inclusion boundary
  c.X2 = Vec2(g.rho, 0.0);          // on the domain boundary
  c.P1 = Vec2(x1, 0.0);
  c.P2 = Vec2(x2, 0.0);
  c.seg1_a = c.P1;
  c.seg1_b = c.X1;
  c.seg2_a = c.X2;
  c.seg2_b = c.P2;
  c.has_seg2 = true;
  return c;
}

namespace {

GapOrbit run_orbit(const Disk& first, const Disk& second, double t0, int n, double x1) {
  GapOrbit orbit;
  orbit.t.reserve(static_cast<std::size_t>(n) + 1);
  orbit.t.push_back(t0);
  Vec2 p(t0, 0.0);
  for (int i = 0; i < n; ++i) {
    p = reflect(second, reflect(first, p));
    const double prev = orbit.t.back();
    orbit.t.push_back(p.x());
    // the ratio is meaningful only while the distance to the fixed point is
    // above roundoff
    const double den = std::abs(prev - x1);
    if (den > 1e-12 * (1.0 + std::abs(x1))) {
      orbit.contraction.push_back(std::abs(p.x() - x1) / den);
    }
  }
  return orbit;
}

}  // namespace

GapOrbit iterate_gap_orbit(const TwoDiskGeometry& g, double t0, int n) {
  const double x1 = fixed_points(g).first;
  return run_orbit(g.b2, g.b1, t0, n, x1);  // R1(R2(.))
}

GapOrbit iterate_gap_orbit(const DiskInDiskGeometry& g, double t0, int n) {
  const double x1 = fixed_points(g).first;
  return run_orbit(g.omega(), g.b, t0, n, x1);  // RB(ROmega(.))
}

}  // namespace gapfield
