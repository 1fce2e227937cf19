#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"
#include "gapfield/potentials.hpp"

namespace gapfield {

// Reference solutions computed by a route independent of the reflection
// series: dense collocation solves of the boundary integral systems, plus the
// classical one-inclusion closed form. Used as ground truth in tests.

struct TwoDiskOracle {
  BoundaryGrid grid1, grid2;
  Eigen::VectorXd phi1, phi2;
  // 1-norm condition estimate of the collocation matrix (1/rcond).
  double cond = 0.0;
  // The plain solve exceeded the condition limit; the mean-constrained
  // (bordered) system was solved instead and accuracy may be degraded.
  bool degraded = false;
};

// Collocation solve of the transmission system
//   lambda_l phi_l - d/dnu_l S_other[phi_other] = d/dnu_l H   on each circle.
// The self-interaction maps mean-zero densities to zero on a circle, so the
// diagonal blocks are exactly lambda*Id; densities are mean-projected.
// A circle within 1e-8 of the background conductivity gets exactly zero
// density. Passing cond_limit <= 1 forces the constrained path.
TwoDiskOracle nystrom_two_disks(const TwoDiskGeometry& g, const HarmonicField& driver,
                                int nodes, double cond_limit = 1e12);

struct DiskInDiskOracle {
  BoundaryGrid grid_omega, grid_b;
  Eigen::VectorXd g, phi_b;
  double cond = 0.0;
  bool degraded = false;
};

// Collocation solve of the interior transmission system for the
// representation u = D_Omega f - S_Omega g + S_B phi:
//   (1/2) g  - d/dnu_Omega S_B[phi]   = d/dnu_Omega D_in f   on the outer circle,
//   lambda phi + d/dnu_B S_Omega[g]   = d/dnu_B D_in f       on the inclusion.
DiskInDiskOracle nystrom_disk_in_disk(const DiskInDiskGeometry& g,
                                      const FourierCoeffs& data, int nodes_omega,
                                      int nodes_b, double cond_limit = 1e12);

// One circular inclusion in free space under the affine driver a.X + c:
// exterior u = a.X + c - sigma r^2 a.zeta/|zeta|^2, interior grad (1-sigma) a.
struct SingleInclusionSolution {
  Disk disk;
  double sigma = 0.0;
  Vec2 a{0.0, 0.0};
  double c = 0.0;

  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;
};

SingleInclusionSolution single_inclusion_closed_form(const Disk& d, Conductivity k,
                                                     const Vec2& a, double c = 0.0);

// Five-point Laplacian defect |u_E+u_W+u_N+u_S-4u_C| divided by
// 4h*max(central gradient estimate, grad_floor): dimensionless, ~0 for
// harmonic fields, O(h*|lap u|/|grad u|) otherwise.
double harmonic_residual(const std::function<double(const Vec2&)>& u, const Vec2& x,
                         double h, double grad_floor);

// Max of the above over points; points closer than 5h to an interface circle
// are skipped (skipped count reported through *skipped if non-null).
double max_harmonic_residual(const std::function<double(const Vec2&)>& u,
                             const std::vector<Vec2>& points,
                             const std::vector<Disk>& interfaces, double h,
                             double grad_floor, int* skipped = nullptr);

}  // namespace gapfield
