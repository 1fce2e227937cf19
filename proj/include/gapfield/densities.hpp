#pragma once

#include <Eigen/Dense>

#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"
#include "gapfield/potentials.hpp"

namespace gapfield {

// Truncation record of a reflection-series evaluation, or the worst case over
// a batch of them. `tail` is a certified bound on the dropped remainder; the
// certificate rests on two monotonicity facts about the conformal-factor
// products along alternating reflection orbits (pair products never exceed 1,
// and once a pair ratio falls below the derived decay factor it stays there),
// which the test suite checks across the admissible geometry range.
struct SeriesTruncation {
  int terms = 0;        // reflection pairs summed
  double tail = 0.0;    // certified bound on the dropped remainder
  double tol = 0.0;     // requested relative tolerance
  int threshold = 0;    // a-priori pair count for the gap scale
  bool early = false;   // stopped at or before the threshold
  void absorb(const SeriesTruncation& other);
};

// Reflection-series evaluators for the transmission problem of two disjoint
// disk inclusions in free space, canonical frame. The fused density
// psi_i = lambda_i phi_i stays finite for trivial inclusions; the one-sided
// normal derivatives of the potential on circle i are psi_i +- phi_i / 2
// (+ outside). Inclusions within the trivial band couple with exactly zero
// strength. Construction refuses |sigma1 sigma2| = 1 with a gap below
// 1e-9 r_min, where the truncation certificate becomes vacuous.
class TwoDiskSeries {
 public:
  TwoDiskSeries(const TwoDiskGeometry& geo, HarmonicField driver,
                double tol = 1e-10);

  const TwoDiskGeometry& geometry() const { return geo_; }
  const DerivedScalars& scalars() const { return sc_; }
  const HarmonicField& driver() const { return driver_; }
  double tolerance() const { return tol_; }
  double sigma(int which) const;  // coupling strength, exact zero when trivial
  double tau() const { return tau_; }
  double drive_sup() const { return drive_sup_; }

  // fused density lambda phi at x on the boundary of disk `which` (1 or 2)
  double psi(int which, const Vec2& x, SeriesTruncation* tr = nullptr) const;
  double phi(int which, const Vec2& x, SeriesTruncation* tr = nullptr) const;

  // single layer potential of phi_which and its gradient, x outside the open
  // disk (boundary evaluation gives the exterior one-sided gradient limit)
  double layer_value(int which, const Vec2& x,
                     SeriesTruncation* tr = nullptr) const;
  Vec2 layer_grad(int which, const Vec2& x,
                  SeriesTruncation* tr = nullptr) const;

 private:
  const Disk& self(int which) const;
  const Disk& other(int which) const;

  TwoDiskGeometry geo_;
  DerivedScalars sc_;
  HarmonicField driver_;
  double tol_;
  double sig1_ = 0.0, sig2_ = 0.0, tau_ = 0.0;
  double drive_sup_ = 0.0;
};

// Reflection-series evaluators for a disk inclusion B near the boundary of
// the disk domain Omega with Dirichlet data f on the outer circle, canonical
// frame. The potential is represented as D f - S_Omega g + S_B phi, where D
// is the double layer of the data. g turns out mean-free, and equals the
// interior normal derivative of the potential on the outer circle.
class DiskInDiskSeries {
 public:
  DiskInDiskSeries(const DiskInDiskGeometry& geo, const FourierCoeffs& data,
                   double tol = 1e-10);

  const DiskInDiskGeometry& geometry() const { return geo_; }
  const DerivedScalars& scalars() const { return sc_; }
  double tolerance() const { return tol_; }
  double sigma() const { return sig_; }
  double drive_sup() const { return drive_sup_; }
  double data_mean() const { return data_mean_; }
  // the double layer of the Dirichlet data (both branches)
  const CircleHarmonics& data_layer() const { return dch_; }

  // fused density lambda phi and phi = 2 sigma psi at x on the inner circle
  double psi_b(const Vec2& x, SeriesTruncation* tr = nullptr) const;
  double phi_b(const Vec2& x, SeriesTruncation* tr = nullptr) const;
  // density of the outer single layer at x on the outer circle
  double g_omega(const Vec2& x, SeriesTruncation* tr = nullptr) const;

  // S_B phi and its gradient, x outside the open inclusion
  double layer_b_value(const Vec2& x, SeriesTruncation* tr = nullptr) const;
  Vec2 layer_b_grad(const Vec2& x, SeriesTruncation* tr = nullptr) const;
  // S_Omega g and its gradient anywhere in the closed domain except the
  // center (where the reflection argument is undefined)
  double layer_omega_value(const Vec2& x, SeriesTruncation* tr = nullptr) const;
  Vec2 layer_omega_grad(const Vec2& x, SeriesTruncation* tr = nullptr) const;

 private:
  DiskInDiskGeometry geo_;
  DerivedScalars sc_;
  CircleHarmonics dch_;
  HarmonicField dfield_;
  double tol_;
  double sig_ = 0.0;
  double data_mean_ = 0.0;
  double drive_sup_ = 0.0;
};

// Densities sampled on uniform grids. phi (and g, which is analytically
// mean-free) get their residual numerical means projected out, so quadrature
// built on top of them sees exactly mean-free densities.
struct TwoDiskDensities {
  BoundaryGrid grid1, grid2;
  Eigen::VectorXd psi1, phi1;
  Eigen::VectorXd psi2, phi2;
  SeriesTruncation trunc;
};
TwoDiskDensities two_disk_densities(const TwoDiskSeries& s, int nodes);

struct DiskInDiskDensities {
  BoundaryGrid grid_b, grid_omega;
  Eigen::VectorXd psi_b, phi_b;
  Eigen::VectorXd g;
  SeriesTruncation trunc;
};
DiskInDiskDensities disk_in_disk_densities(const DiskInDiskSeries& s,
                                           int nodes_b, int nodes_omega);

// Independent residual checks: plug the grid densities back into the
// integral equations, evaluating the layer potentials by quadrature from
// potentials.* instead of by the series. Returns the relative sup residual.
double two_disk_residual(const HarmonicField& driver,
                         const TwoDiskDensities& d);
double disk_in_disk_residual(const DiskInDiskGeometry& geo,
                             const FourierCoeffs& data,
                             const DiskInDiskDensities& d);

}  // namespace gapfield
