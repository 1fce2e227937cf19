#pragma once

#include <Eigen/Dense>

#include "gapfield/densities.hpp"
#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"
#include "gapfield/potentials.hpp"

namespace gapfield {

// Subregion labels across the two problem families.
enum class Region { Exterior, Inside1, Inside2, Annulus, InsideB };

struct SolveOptions {
  int nodes = 256;     // boundary grid resolution per circle
  double tol = 1e-10;  // series truncation tolerance
};

// One-sided gradient traces at the grid nodes of one circle, canonical frame.
// The normal traces come from the density jump identities (psi +- phi/2, i.e.
// (lambda +- 1/2) phi), never from near-boundary quadrature; the tangential
// trace is continuous across the interface.
struct GradientTraces {
  Eigen::VectorXd normal_out, normal_in, tangential;
};

// Estimated sup of |grad u| with the location where it is attained
// (user frame).
struct SupNormEstimate {
  double value = 0.0;
  Vec2 location{0.0, 0.0};
};

enum class SupRegion { All, Exterior, Inside1, Inside2, Annulus, InsideB };

// Full potential for two disk inclusions in free space,
//   u = H + S_1 phi_1 + S_2 phi_2,
// valid in every region. Gradient queries within 1e-13 r of an interface snap
// to the one-sided trace identities (side chosen by the signed distance).
// Tangential traces come from the conjugate transmission problem
// (conductivities 1/k_i, driver the harmonic conjugate of H), solved at
// construction: du/dT = -dv/dnu|_+ on each circle.
// eval/grad take user-frame points; trace accessors work in the canonical
// frame (theta is the canonical angle on the circle).
class TwoDiskSolution {
 public:
  double eval(const Vec2& x_user) const;
  Vec2 grad(const Vec2& x_user) const;
  Region region(const Vec2& x_user) const;

  const TwoDiskGeometry& geometry() const { return geo_; }
  const HarmonicField& driver() const { return driver_; }
  const TwoDiskDensities& densities() const { return dens_; }
  const TwoDiskDensities& conjugate_densities() const { return conj_; }
  const SeriesTruncation& truncation() const { return dens_.trunc; }

  // one-sided traces on circle 1 or 2 at its grid nodes
  const GradientTraces& traces(int which) const;
  // full one-sided gradient at angle theta on circle `which`, canonical
  // frame; side +1 = exterior limit, -1 = inclusion-side limit
  Vec2 boundary_grad(int which, double theta, int side) const;

 private:
  friend TwoDiskSolution solve_two_disks(const TwoDiskGeometry&, const HarmonicField&,
                                         const SolveOptions&);
  TwoDiskSolution(const TwoDiskSeries& s, const TwoDiskSeries& sc,
                  const SolveOptions& opts);

  TwoDiskGeometry geo_;
  HarmonicField driver_;        // canonical frame
  TwoDiskDensities dens_;       // primal densities
  TwoDiskDensities conj_;       // conjugate-problem densities
  GradientTraces tr1_, tr2_;
  // trace interpolants (trig coefficients of the node traces)
  FourierCoeffs n1_out_, n1_in_, t1_, n2_out_, n2_in_, t2_;
};

// Driver H is given in the canonical frame of `geo`.
TwoDiskSolution solve_two_disks(const TwoDiskGeometry& geo, const HarmonicField& driver,
                                const SolveOptions& opts = {});

// side-resolved node traces on both circles, canonical frame
struct TwoDiskTraces {
  Eigen::VectorXd normal1, tangential1, normal2, tangential2;
};
TwoDiskTraces boundary_gradient_two_disks(const TwoDiskSolution& s, int side);

// Dirichlet problem for one inclusion near the boundary of a disk domain,
//   u = D_Omega f - S_Omega g + S_B phi   in Omega,
// with u = f on the outer circle. g equals du/dnu on the inner side of the
// outer circle. Points outside the closed domain are a domain error.
class DirichletSolution {
 public:
  double eval(const Vec2& x_user) const;
  Vec2 grad(const Vec2& x_user) const;
  Region region(const Vec2& x_user) const;

  const DiskInDiskGeometry& geometry() const { return geo_; }
  const FourierCoeffs& data() const { return data_; }
  const CircleHarmonics& data_layer() const { return dl_; }
  const DiskInDiskDensities& densities() const { return dens_; }
  const SeriesTruncation& truncation() const { return dens_.trunc; }

  // traces on the inclusion circle at its grid nodes; the tangential trace is
  // the spectral arclength derivative of the surface values of u
  const GradientTraces& inclusion_traces() const { return trb_; }
  // interior-side traces on the outer circle: normal = g, tangential = df/ds
  const GradientTraces& outer_traces() const { return tro_; }

  // circle: 1 = inclusion, 2 = outer. side follows the outward normal of the
  // named circle: +1 is the side the normal points into (the annulus for the
  // inclusion, the domain exterior for the outer circle, the latter
  // rejected), -1 the other side.
  Vec2 boundary_grad(int circle, double theta, int side) const;

 private:
  friend DirichletSolution solve_dirichlet_disk_in_disk(const DiskInDiskGeometry&,
                                                        const FourierCoeffs&,
                                                        const SolveOptions&);
  DirichletSolution(const DiskInDiskSeries& s, const FourierCoeffs& data,
                    const SolveOptions& opts);

  DiskInDiskGeometry geo_;
  FourierCoeffs data_;
  CircleHarmonics dl_;
  DiskInDiskDensities dens_;
  GradientTraces trb_, tro_;
  FourierCoeffs nb_out_, nb_in_, tb_, no_in_, to_;
};

DirichletSolution solve_dirichlet_disk_in_disk(const DiskInDiskGeometry& geo,
                                               const FourierCoeffs& data,
                                               const SolveOptions& opts = {});

// Neumann problem du/dnu = g_data on the outer circle (mean-zero data,
// solution normalized to a mean-zero trace there). Solved through the
// conjugate Dirichlet problem: G is the arclength antiderivative of the data,
// v solves the Dirichlet problem with conductivity 1/k and data G, and
// grad u = rot270(grad v) in the annulus, rot270(grad v)/k inside a finite-k
// inclusion. Insulating inclusions take the harmonic extension of the trace
// instead; perfectly conducting ones are constant inside.
class NeumannSolution {
 public:
  double eval(const Vec2& x_user) const;
  Vec2 grad(const Vec2& x_user) const;
  Region region(const Vec2& x_user) const;

  const DiskInDiskGeometry& geometry() const { return geo_; }
  const FourierCoeffs& data() const { return data_; }
  const DirichletSolution& conjugate() const { return conj_; }
  // additive normalization constants of u (annulus / inside the inclusion)
  double constant_annulus() const { return c_out_; }
  double constant_inclusion() const { return c_in_; }

  const GradientTraces& inclusion_traces() const { return trb_; }
  const GradientTraces& outer_traces() const { return tro_; }
  Vec2 boundary_grad(int circle, double theta, int side) const;

 private:
  friend NeumannSolution solve_neumann_disk_in_disk(const DiskInDiskGeometry&,
                                                    const FourierCoeffs&,
                                                    const SolveOptions&);
  NeumannSolution(const DiskInDiskGeometry& geo, const FourierCoeffs& data,
                  const SolveOptions& opts);
  double conj_value(const Vec2& x_canon) const;

  DiskInDiskGeometry geo_;
  FourierCoeffs data_;
  DirichletSolution conj_;
  // closed-form pieces of the harmonic conjugate of v
  CircleHarmonics vt_dl_, vt_slo_, vt_slb_;
  CircleHarmonics inner_ext_;  // insulating inclusions only
  double c_out_ = 0.0, c_in_ = 0.0;
  GradientTraces trb_, tro_;
  FourierCoeffs nb_out_, nb_in_, tb_, no_in_, to_;
};

NeumannSolution solve_neumann_disk_in_disk(const DiskInDiskGeometry& geo,
                                           const FourierCoeffs& data,
                                           const SolveOptions& opts = {});

// Sup of |grad u| over the closure of the requested region, estimated by
// densely scanning the boundary trace interpolants (the gradient magnitude is
// subharmonic in every subregion, so the sup lives on the bounding circles)
// with extra refinement in a sqrt(eps)-wide window around the gap, plus the
// far-field driver floor for the free-space problem.
SupNormEstimate grad_sup_norm(const TwoDiskSolution& s,
                              SupRegion region = SupRegion::All, int oversample = 16);
SupNormEstimate grad_sup_norm(const DirichletSolution& s,
                              SupRegion region = SupRegion::All, int oversample = 16);
SupNormEstimate grad_sup_norm(const NeumannSolution& s,
                              SupRegion region = SupRegion::All, int oversample = 16);

}  // namespace gapfield
