#pragma once

#include <string>
#include <vector>

#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"
#include "gapfield/solver.hpp"

namespace gapfield {

enum class ProblemKind { TwoDisks, Dirichlet, Neumann };

// Reciprocals of the gap-asymptotic denominators, together with the projected
// driver infima that multiply the lower estimate. All quantities depend only
// on the geometry and the driving data, never on a computed solution, so they
// can be produced before (or independently of) a solve.
//
//   two disks:    lower 1/(1 - tau   + (r_*/r_min) sqrt(eps))
//                 upper 1/(1 - |tau| + (r_*/r_max) sqrt(eps))
//   Dirichlet:    lower 1/(1 - sigma + 4 r^ sqrt(eps)),  upper 1/(1 - |sigma| + r^ sqrt(eps))
//   Neumann:      lower 1/(1 + sigma + 4 r^ sqrt(eps)),  upper same as Dirichlet
//
// with r^ = sqrt((rho - r)/(rho r)). The infima run over the gap-axis
// segments of critical_geometry(): the driver gradient is projected on the
// normal at the closest points for conducting regimes and on the tangent for
// resistive ones, and the smallest magnitude along the segment is kept.
struct BoundFactors {
  ProblemKind kind = ProblemKind::TwoDisks;
  double lower_factor = 0.0;
  double upper_factor = 0.0;
  double inf_term1 = 0.0;  // infimum paired with the first closest point
  double inf_term2 = 0.0;  // infimum paired with the second closest point
  bool tangential = false;  // projection direction chosen by the regime rule
  bool regime_met = false;  // conductivities satisfy the lower-estimate hypothesis
  bool vacuous = false;     // an infimum vanished: the lower estimate asserts nothing
};

// Free-space pair: the driver is the harmonic background field.
BoundFactors bound_factors(const TwoDiskGeometry& geo, const HarmonicField& driver);

// Bounded domain: the infimum field is the closed-form data layer on the outer
// circle (double layer of the Dirichlet data, single layer of the flux data).
BoundFactors bound_factors(const DiskInDiskGeometry& geo, const FourierCoeffs& data,
                           bool neumann);

// One solve of a sweep. Failures are recorded in place and never abort the
// sweep. Degenerate conductivities report as +inf (perfectly conducting) and
// 0 (insulating); the bounded problems put the background in k2.
struct SweepRow {
  double eps = 0.0;
  double k1 = 1.0, k2 = 1.0;
  double grad_x1 = 0.0;  // |grad u| at the first closest point, exterior side
  double grad_x2 = 0.0;  // second closest point (interior side on the outer circle)
  double sup_norm = 0.0;
  double lower_factor = 0.0, upper_factor = 0.0;
  double inf_term = 0.0;  // infimum paired with the first closest point
  int terms_used = 0;
  double ratio_low = 0.0;  // grad_x1 / (lower_factor * inf_term), 0 when vacuous
  double ratio_up = 0.0;   // sup_norm / upper_factor
  int nodes = 0;           // quadrature resolution used for this row
  bool vacuous = false;
  bool failed = false;
  std::string error;
};

struct GapSample {
  double t = 0.0;          // distance from the first closest point along the axis
  double magnitude = 0.0;  // |grad u| there
};

struct SweepReport {
  ProblemKind kind = ProblemKind::TwoDisks;
  std::vector<SweepRow> rows;  // sorted by eps ascending, k grid inner
  // |grad u| across the gap for the smallest eps that solved, for plotting
  std::vector<GapSample> gap_profile;
  double gap_eps = 0.0;
};

struct TwoDiskSweepSpec {
  double r1 = 1.0, r2 = 1.0;
  std::vector<double> eps;
  std::vector<std::pair<Conductivity, Conductivity>> ks;
  HarmonicField driver;
  SolveOptions opts;  // opts.nodes <= 0 selects the resolution per eps
};

struct DiskInDiskSweepSpec {
  double rho = 2.0, r = 1.0;
  bool neumann = false;
  std::vector<double> eps;
  std::vector<Conductivity> ks;
  FourierCoeffs data;
  SolveOptions opts;
};

SweepReport sweep(const TwoDiskSweepSpec& spec);
SweepReport sweep(const DiskInDiskSweepSpec& spec);

// Power-of-two node count resolving the sqrt(eps r) boundary peak, clamped to
// [256, 2048]. Gap-node traces are exact at any resolution; this only sets the
// interpolation quality of the sup-norm scan.
int auto_nodes(double eps, double r_min);

// Least-squares slope of log(grad_x1) against log(eps) over the successful
// rows. Requires at least 4 such rows spanning at least two decades of eps.
struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;  // largest |log residual| of the fit
  int rows_used = 0;
};

RateFit fit_blowup_rate(const SweepReport& report);

// Spread of the computed-to-predicted ratios across a sweep. Bounded factors
// are sharp when both dispersions stay within a modest constant. Vacuous and
// failed rows are excluded; a single usable row gives dispersion exactly 1.
struct SandwichResult {
  double low_min = 0.0, low_max = 0.0, low_dispersion = 1.0;
  double up_min = 0.0, up_max = 0.0, up_dispersion = 1.0;
  int rows_used = 0;
  int excluded = 0;
};

SandwichResult sandwich_check(const SweepReport& report);

}  // namespace gapfield
