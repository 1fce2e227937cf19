#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "gapfield/common.hpp"

namespace gapfield {

struct Disk {
  Vec2 center{0.0, 0.0};
  double radius = 1.0;

  bool contains(const Vec2& x) const { return (x - center).norm() < radius; }
  double signed_distance(const Vec2& x) const { return (x - center).norm() - radius; }
  Vec2 normal_at(const Vec2& x) const { return (x - center).normalized(); }
  Vec2 point_at(double theta) const {
    return center + radius * Vec2(std::cos(theta), std::sin(theta));
  }
};

// Inversion in the circle: X -> Z + r^2 (X-Z)/|X-Z|^2. Involution fixing the
// boundary, swapping inside and outside; undefined at the center.
Vec2 reflect(const Disk& d, const Vec2& x);

// g(X) = r^2/|X-Z|^2. Satisfies g(R(X)) * g(X) = 1.
double conformal_factor(const Disk& d, const Vec2& x);

// DR(X) = g(X) (I - 2 n n^T), n = (X-Z)/|X-Z|. Symmetric, det = -g^2;
// on the axis through the center it is g * diag(-1, 1).
Mat2 reflection_jacobian(const Disk& d, const Vec2& x);

// Conductivity of an inclusion relative to the background. The degenerate
// limits are tags, not magic doubles, so the limit scalars come out exact.
struct Conductivity {
  enum class Kind { Finite, PerfectlyConducting, Insulating };
  Kind kind = Kind::Finite;
  double value = 1.0;  // meaningful only for Kind::Finite

  static Conductivity finite(double k);
  static Conductivity perfectly_conducting() { return {Kind::PerfectlyConducting, 0.0}; }
  static Conductivity insulating() { return {Kind::Insulating, 0.0}; }

  // sigma = (k-1)/(k+1); exactly +1 / -1 at the degenerate tags.
  double sigma() const;
  // lambda = (k+1)/(2(k-1)) = 1/(2 sigma); +-1/2 at the tags, +inf at k = 1.
  double lambda() const;
  // Inclusions within 1e-8 of the background conductivity carry no charge.
  bool is_trivial() const;
  // k -> 1/k, swapping the degenerate tags. sigma flips sign exactly.
  Conductivity reciprocal() const;
  bool is_finite() const { return kind == Kind::Finite; }
};

// Isometry between the user frame and the canonical frame (first center at
// the origin, second center on the positive x axis).
struct Frame {
  double c = 1.0, s = 0.0;  // rotation column (c, s) = image of e1
  Vec2 origin{0.0, 0.0};    // user-frame coordinates of the canonical origin

  Vec2 to_canonical(const Vec2& x_user) const {
    const Vec2 d = x_user - origin;
    return Vec2(c * d.x() + s * d.y(), -s * d.x() + c * d.y());
  }
  Vec2 to_user(const Vec2& x_canon) const {
    return origin + Vec2(c * x_canon.x() - s * x_canon.y(),
                         s * x_canon.x() + c * x_canon.y());
  }
  Vec2 vector_to_canonical(const Vec2& v) const {
    return Vec2(c * v.x() + s * v.y(), -s * v.x() + c * v.y());
  }
  Vec2 vector_to_user(const Vec2& v) const {
    return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
  }
  bool is_identity() const { return c == 1.0 && s == 0.0 && origin == Vec2(0.0, 0.0); }
};

// Two disjoint disks in free space, stored in the canonical frame:
// Z1 = (0,0), Z2 = (r1+r2+eps, 0). eps is always recomputed from the centers.
struct TwoDiskGeometry {
  Disk b1, b2;
  Conductivity k1, k2;
  double eps = 0.0;
  Frame frame;

  static TwoDiskGeometry canonical(double r1, double r2, double eps,
                                   Conductivity k1, Conductivity k2);
  // eps_declared, when present, must match the recomputed gap to 1e-12
  // relative or construction fails.
  static TwoDiskGeometry from_centers(const Vec2& c1, double r1, const Vec2& c2,
                                      double r2, Conductivity k1, Conductivity k2,
                                      std::optional<double> eps_declared = {});
};

// Disk B strictly inside the disk Omega = B(0, rho), with the center of B on
// the positive x axis at rho - r - eps. Construction requires the B-to-boundary
// gap to be small next to the annular thickness: eps*guard <= rho - r.
struct DiskInDiskGeometry {
  double rho = 2.0;
  Disk b;
  Conductivity k;
  double eps = 0.0;
  Frame frame;

  Disk omega() const { return Disk{{0.0, 0.0}, rho}; }

  static DiskInDiskGeometry canonical(double rho, double r, double eps, Conductivity k,
                                      double guard = 10.0);
  static DiskInDiskGeometry from_centers(const Vec2& c_omega, double rho,
                                         const Vec2& c_b, double r, Conductivity k,
                                         std::optional<double> eps_declared = {},
                                         double guard = 10.0);
};

// Scalars derived from a geometry. Fields that do not apply to the problem
// at hand are left at zero. lambda values may be +inf (trivial inclusion).
struct DerivedScalars {
  // two disks
  double lambda1 = 0.0, lambda2 = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0;
  double tau = 0.0;  // sigma1 * sigma2 = 1/(4 lambda1 lambda2)
  double r_min = 0.0, r_max = 0.0;
  double r_star = 0.0;  // sqrt(2 r1 r2 / (r1 + r2))

  // disk in disk
  double lambda = 0.0, sigma = 0.0;
  double r_star_hat = 0.0;  // sqrt((rho - r)/(rho r)), units 1/sqrt(length)

  // contraction data shared by the series machinery
  double a = 0.0;  // per-orbit conformal-product floor
  double b = 0.0;  // per-step decay factor past the threshold
  int N = 0;       // threshold: first integer beyond the gap scale
};

DerivedScalars derived_scalars(const TwoDiskGeometry& g);
DerivedScalars derived_scalars(const DiskInDiskGeometry& g);

// Closest boundary points, fixed points of the combined reflections, and the
// axis segments that feed the bound factors. Canonical-frame coordinates.
struct CriticalGeometry {
  Vec2 X1, X2;        // closest boundary points across the gap
  Vec2 P1, P2;        // fixed points of the combined reflection map
  double x1 = 0.0;    // abscissa of P1 (x1 < x2)
  double x2 = 0.0;
  Vec2 seg1_a, seg1_b;  // two disks: I = [P1, P2]; disk in disk: J1 = [P1, X1]
  Vec2 seg2_a, seg2_b;  // disk in disk only: J2 = [X2, P2]
  bool has_seg2 = false;
};

// Roots x1 < x2 of the fixed-point quadratic of the combined reflections.
std::pair<double, double> fixed_points(const TwoDiskGeometry& g);
std::pair<double, double> fixed_points(const DiskInDiskGeometry& g);

CriticalGeometry critical_geometry(const TwoDiskGeometry& g);
CriticalGeometry critical_geometry(const DiskInDiskGeometry& g);

struct GapOrbit {
  std::vector<double> t;            // abscissas, t[0] = start
  std::vector<double> contraction;  // |t[n+1]-x1| / |t[n]-x1|
};

// Iterates the combined reflection map along the gap axis from an on-axis
// start point. Two disks: R1(R2(.)); disk in disk: RB(ROmega(.)).
GapOrbit iterate_gap_orbit(const TwoDiskGeometry& g, double t0, int n);
GapOrbit iterate_gap_orbit(const DiskInDiskGeometry& g, double t0, int n);

// Incremental state for walking a reflection chain: current point, accumulated
// Jacobian of the composed map, and the product of conformal factors (which is
// the operator norm of the accumulated Jacobian).
struct ReflectionOrbit {
  Vec2 y;
  Mat2 jac = Mat2::Identity();
  double gprod = 1.0;

  explicit ReflectionOrbit(const Vec2& start) : y(start) {}
  void step(const Disk& d) {
    gprod *= conformal_factor(d, y);
    jac = reflection_jacobian(d, y) * jac;
    y = reflect(d, y);
  }
};

}  // namespace gapfield
