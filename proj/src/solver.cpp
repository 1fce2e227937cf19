#include "gapfield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

namespace gapfield {

namespace {

// Trig interpolant at an arbitrary angle, phase-recurrence per mode.
double fourier_at(const FourierCoeffs& c, double theta) {
  const Cplx e(std::cos(theta), std::sin(theta));
  const int nc = static_cast<int>(c.ac.size());
  const int ns = static_cast<int>(c.as.size());
  const int top = std::max(nc, ns);
  double v = c.a0;
  Cplx p = e;
  for (int n = 1; n <= top; ++n) {
    if (n <= nc) v += c.ac[n - 1] * p.real();
    if (n <= ns) v += c.as[n - 1] * p.imag();
    p *= e;
  }
  return v;
}

TwoDiskGeometry reciprocal_conductivities(const TwoDiskGeometry& g) {
  TwoDiskGeometry out = g;
  out.k1 = g.k1.reciprocal();
  out.k2 = g.k2.reciprocal();
  return out;
}

DiskInDiskGeometry reciprocal_conductivity(const DiskInDiskGeometry& g) {
  DiskInDiskGeometry out = g;
  out.k = g.k.reciprocal();
  return out;
}

// dG/ds = g on the circle of radius rho, normalized to zero mean.
FourierCoeffs arclength_antiderivative(const FourierCoeffs& g, double rho) {
  FourierCoeffs out;
  const int top = g.modes();
  out.ac.assign(top, 0.0);
  out.as.assign(top, 0.0);
  for (int n = 1; n <= top; ++n) {
    out.ac[n - 1] = -rho * g.sinc(n) / n;
    out.as[n - 1] = rho * g.cosc(n) / n;
  }
  return out;
}

// df/ds of boundary data on the circle of radius rho.
FourierCoeffs arclength_derivative(const FourierCoeffs& f, double rho) {
  FourierCoeffs out;
  const int top = f.modes();
  out.ac.assign(top, 0.0);
  out.as.assign(top, 0.0);
  for (int n = 1; n <= top; ++n) {
    out.ac[n - 1] = n * f.sinc(n) / rho;
    out.as[n - 1] = -n * f.cosc(n) / rho;
  }
  return out;
}

double angle_on(const Disk& d, const Vec2& x) {
  const Vec2 rel = x - d.center;
  return std::atan2(rel.y(), rel.x());
}

// Walks one circle side: a coarse uniform sweep plus a dense window around
// the gap-facing angle, where the trace peaks on a sqrt(eps r) scale.
void scan_trace(const std::function<Vec2(double)>& bg, const Disk& d, double window_center,
                double window_halfwidth, int coarse, SupNormEstimate* best) {
  auto consider = [&](double theta) {
    const Vec2 v = bg(theta);
    const double a = v.norm();
    if (a > best->value) {
      best->value = a;
      best->location = d.point_at(theta);
    }
  };
  for (int j = 0; j < coarse; ++j) consider(2.0 * kPi * j / coarse);
  const int fine = 4096;
  for (int j = 0; j <= fine; ++j)
    consider(window_center + window_halfwidth * (2.0 * j / fine - 1.0));
}

double gap_window(double eps, double radius) {
  return std::min(kPi, 12.0 * std::sqrt(eps / radius));
}

}  // namespace

TwoDiskSolution::TwoDiskSolution(const TwoDiskSeries& s, const TwoDiskSeries& sc,
                                 const SolveOptions& opts)
    : geo_(s.geometry()),
      driver_(s.driver()),
      dens_(two_disk_densities(s, opts.nodes)),
      conj_(two_disk_densities(sc, opts.nodes)) {
  tr1_.normal_out = dens_.psi1 + 0.5 * dens_.phi1;
  tr1_.normal_in = dens_.psi1 - 0.5 * dens_.phi1;
  tr2_.normal_out = dens_.psi2 + 0.5 * dens_.phi2;
  tr2_.normal_in = dens_.psi2 - 0.5 * dens_.phi2;
  // du/dT = -dv/dnu|_+ for the conjugate solution v (same trace either side)
  tr1_.tangential = -(conj_.psi1 + 0.5 * conj_.phi1);
  tr2_.tangential = -(conj_.psi2 + 0.5 * conj_.phi2);

  n1_out_ = to_fourier(dens_.grid1, tr1_.normal_out);
  n1_in_ = to_fourier(dens_.grid1, tr1_.normal_in);
  t1_ = to_fourier(dens_.grid1, tr1_.tangential);
  n2_out_ = to_fourier(dens_.grid2, tr2_.normal_out);
  n2_in_ = to_fourier(dens_.grid2, tr2_.normal_in);
  t2_ = to_fourier(dens_.grid2, tr2_.tangential);
}

TwoDiskSolution solve_two_disks(const TwoDiskGeometry& geo, const HarmonicField& driver,
                                const SolveOptions& opts) {
  if (driver.empty()) throw ConfigError("two-disk solve needs a nonempty driver field");
  TwoDiskSeries s(geo, driver, opts.tol);
  TwoDiskSeries sc(reciprocal_conductivities(geo), harmonic_conjugate(driver), opts.tol);
  return TwoDiskSolution(s, sc, opts);
}

double TwoDiskSolution::eval(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  return driver_.eval(x) + single_layer_eval(dens_.grid1, dens_.phi1, x) +
         single_layer_eval(dens_.grid2, dens_.phi2, x);
}

Vec2 TwoDiskSolution::grad(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  for (int which : {1, 2}) {
    const Disk& d = which == 1 ? geo_.b1 : geo_.b2;
    const double sd = d.signed_distance(x);
    if (std::abs(sd) <= 1e-13 * d.radius)
      return geo_.frame.vector_to_user(
          boundary_grad(which, angle_on(d, x), sd >= 0.0 ? 1 : -1));
  }
  const Vec2 g = driver_.grad(x) + single_layer_grad(dens_.grid1, dens_.phi1, x) +
                 single_layer_grad(dens_.grid2, dens_.phi2, x);
  return geo_.frame.vector_to_user(g);
}

Region TwoDiskSolution::region(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.b1.contains(x)) return Region::Inside1;
  if (geo_.b2.contains(x)) return Region::Inside2;
  return Region::Exterior;
}

const GradientTraces& TwoDiskSolution::traces(int which) const {
  if (which != 1 && which != 2) throw ConfigError("circle index must be 1 or 2");
  return which == 1 ? tr1_ : tr2_;
}

Vec2 TwoDiskSolution::boundary_grad(int which, double theta, int side) const {
  if (which != 1 && which != 2) throw ConfigError("circle index must be 1 or 2");
  const FourierCoeffs& nc = which == 1 ? (side >= 0 ? n1_out_ : n1_in_)
                                       : (side >= 0 ? n2_out_ : n2_in_);
  const FourierCoeffs& tc = which == 1 ? t1_ : t2_;
  const Vec2 nu(std::cos(theta), std::sin(theta));
  return Vec2(fourier_at(nc, theta) * nu + fourier_at(tc, theta) * rot90(nu));
}

TwoDiskTraces boundary_gradient_two_disks(const TwoDiskSolution& s, int side) {
  if (side == 0) throw ConfigError("side must be +1 (exterior) or -1 (interior)");
  TwoDiskTraces t;
  const GradientTraces& a = s.traces(1);
  const GradientTraces& b = s.traces(2);
  t.normal1 = side > 0 ? a.normal_out : a.normal_in;
  t.normal2 = side > 0 ? b.normal_out : b.normal_in;
  t.tangential1 = a.tangential;
  t.tangential2 = b.tangential;
  return t;
}

DirichletSolution::DirichletSolution(const DiskInDiskSeries& s, const FourierCoeffs& data,
                                     const SolveOptions& opts)
    : geo_(s.geometry()),
      data_(data),
      dl_(s.data_layer()),
      dens_(disk_in_disk_densities(s, opts.nodes, opts.nodes)) {
  trb_.normal_out = dens_.psi_b + 0.5 * dens_.phi_b;
  trb_.normal_in = dens_.psi_b - 0.5 * dens_.phi_b;
  // tangential trace: spectral arclength derivative of the surface values
  const Eigen::VectorXd own = single_layer_on_surface(dens_.grid_b, dens_.phi_b);
  Eigen::VectorXd ub(dens_.grid_b.m);
  for (int j = 0; j < dens_.grid_b.m; ++j) {
    const Vec2 x = dens_.grid_b.node(j);
    ub(j) = dl_.eval_inside(x) - single_layer_eval(dens_.grid_omega, dens_.g, x) + own(j);
  }
  trb_.tangential = tangential_derivative(dens_.grid_b, ub);

  // the outer circle has no exterior side; both normal slots hold the
  // interior trace g
  tro_.normal_in = dens_.g;
  tro_.normal_out = dens_.g;
  to_ = arclength_derivative(data_, geo_.rho);
  tro_.tangential = from_fourier(dens_.grid_omega, to_);

  nb_out_ = to_fourier(dens_.grid_b, trb_.normal_out);
  nb_in_ = to_fourier(dens_.grid_b, trb_.normal_in);
  tb_ = to_fourier(dens_.grid_b, trb_.tangential);
  no_in_ = to_fourier(dens_.grid_omega, tro_.normal_in);
}

DirichletSolution solve_dirichlet_disk_in_disk(const DiskInDiskGeometry& geo,
                                               const FourierCoeffs& data,
                                               const SolveOptions& opts) {
  if (data.modes() > opts.nodes / 2)
    throw ConfigError("boundary data bandwidth exceeds the grid Nyquist; raise nodes");
  DiskInDiskSeries s(geo, data, opts.tol);
  return DirichletSolution(s, data, opts);
}

double DirichletSolution::eval(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("evaluation outside the closed domain", x_user);
  return dl_.eval_inside(x) - single_layer_eval(dens_.grid_omega, dens_.g, x) +
         single_layer_eval(dens_.grid_b, dens_.phi_b, x);
}

Vec2 DirichletSolution::grad(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  const double sdo = geo_.omega().signed_distance(x);
  if (sdo > 1e-13 * geo_.rho)
    throw DomainError("evaluation outside the closed domain", x_user);
  const double sdb = geo_.b.signed_distance(x);
  if (std::abs(sdb) <= 1e-13 * geo_.b.radius)
    return geo_.frame.vector_to_user(
        boundary_grad(1, angle_on(geo_.b, x), sdb >= 0.0 ? 1 : -1));
  if (std::abs(sdo) <= 1e-13 * geo_.rho)
    return geo_.frame.vector_to_user(boundary_grad(2, std::atan2(x.y(), x.x()), -1));
  const Vec2 g = dl_.grad_inside(x) - single_layer_grad(dens_.grid_omega, dens_.g, x) +
                 single_layer_grad(dens_.grid_b, dens_.phi_b, x);
  return geo_.frame.vector_to_user(g);
}

Region DirichletSolution::region(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("point outside the closed domain", x_user);
  return geo_.b.contains(x) ? Region::InsideB : Region::Annulus;
}

Vec2 DirichletSolution::boundary_grad(int circle, double theta, int side) const {
  const Vec2 nu(std::cos(theta), std::sin(theta));
  if (circle == 1) {
    const FourierCoeffs& nc = side >= 0 ? nb_out_ : nb_in_;
    return Vec2(fourier_at(nc, theta) * nu + fourier_at(tb_, theta) * rot90(nu));
  }
  if (circle != 2) throw ConfigError("circle index must be 1 (inclusion) or 2 (outer)");
  if (side >= 0) throw ConfigError("the outer circle has no trace outside the domain");
  return Vec2(fourier_at(no_in_, theta) * nu + fourier_at(to_, theta) * rot90(nu));
}

NeumannSolution::NeumannSolution(const DiskInDiskGeometry& geo, const FourierCoeffs& data,
                                 const SolveOptions& opts)
    : geo_(geo),
      data_(data),
      conj_(solve_dirichlet_disk_in_disk(reciprocal_conductivity(geo),
                                         arclength_antiderivative(data, geo.rho), opts)) {
  const DiskInDiskDensities& vd = conj_.densities();
  vt_dl_ = conj_.data_layer().conjugate();
  CircleHarmonics slo = single_layer_harmonics(vd.grid_omega, vd.g);
  CircleHarmonics slb = single_layer_harmonics(vd.grid_b, vd.phi_b);
  // both densities are mean-free by flux conservation (and projected so when
  // sampled); the log coefficients carry only roundoff dust
  slo.clog = 0.0;
  slb.clog = 0.0;
  vt_slo_ = slo.conjugate();
  vt_slb_ = slb.conjugate();

  // vtilde from the annulus side of the inclusion circle: the conjugate of a
  // single layer jumps across its own circle, so the branch is explicit
  auto vtilde_outer = [&](const Vec2& x) {
    return vt_dl_.eval_inside(x) - vt_slo_.eval_inside(x) + vt_slb_.eval_outside(x);
  };
  auto vtilde_inner = [&](const Vec2& x) {
    return vt_dl_.eval_inside(x) - vt_slo_.eval_inside(x) + vt_slb_.eval_inside(x);
  };

  // u = -vtilde + c_out in the annulus, normalized to a mean-zero outer trace
  Eigen::VectorXd vo(vd.grid_omega.m);
  for (int j = 0; j < vd.grid_omega.m; ++j) vo(j) = vtilde_outer(vd.grid_omega.node(j));
  c_out_ = grid_mean(vd.grid_omega, vo);

  const int mb = vd.grid_b.m;
  Eigen::VectorXd vp(mb), vm(mb), trace(mb);
  for (int j = 0; j < mb; ++j) {
    vp(j) = vtilde_outer(vd.grid_b.node(j));
    vm(j) = vtilde_inner(vd.grid_b.node(j));
    trace(j) = c_out_ - vp(j);
  }
  c_in_ = grid_mean(vd.grid_b, trace);
  if (geo_.k.is_finite()) {
    // continuity across the inclusion circle: -vp + c_out = -vm/k + c_in
    Eigen::VectorXd shift = vp - vm / geo_.k.value;
    c_in_ = c_out_ - grid_mean(vd.grid_b, shift);
  } else if (geo_.k.kind == Conductivity::Kind::Insulating) {
    inner_ext_ = interior_extension_closed_form(geo_.b, to_fourier(vd.grid_b, trace));
  }

  // traces of u from those of v: grad u = rot270(grad v) in the annulus
  const GradientTraces& vb = conj_.inclusion_traces();
  trb_.normal_out = vb.tangential;
  trb_.tangential = -vb.normal_out;
  if (geo_.k.is_finite()) {
    trb_.normal_in = vb.tangential / geo_.k.value;
  } else if (geo_.k.kind == Conductivity::Kind::Insulating) {
    Eigen::VectorXd nin(mb);
    for (int j = 0; j < mb; ++j)
      nin(j) = inner_ext_.grad_inside(vd.grid_b.node(j)).dot(vd.grid_b.normal(j));
    trb_.normal_in = nin;
  } else {
    trb_.normal_in = Eigen::VectorXd::Zero(mb);
  }

  tro_.normal_in = from_fourier(vd.grid_omega, data_);
  tro_.normal_out = tro_.normal_in;
  tro_.tangential = -conj_.outer_traces().normal_in;

  nb_out_ = to_fourier(vd.grid_b, trb_.normal_out);
  nb_in_ = to_fourier(vd.grid_b, trb_.normal_in);
  tb_ = to_fourier(vd.grid_b, trb_.tangential);
  no_in_ = data_;
  to_ = to_fourier(vd.grid_omega, tro_.tangential);
}

NeumannSolution solve_neumann_disk_in_disk(const DiskInDiskGeometry& geo,
                                           const FourierCoeffs& data,
                                           const SolveOptions& opts) {
  double scale = std::abs(data.a0);
  for (double a : data.ac) scale += std::abs(a);
  for (double a : data.as) scale += std::abs(a);
  if (std::abs(data.a0) > 1e-12 * std::max(1.0, scale))
    throw ConfigError("flux data must have zero mean");
  if (data.modes() > opts.nodes / 2)
    throw ConfigError("boundary data bandwidth exceeds the grid Nyquist; raise nodes");
  return NeumannSolution(geo, data, opts);
}

double NeumannSolution::conj_value(const Vec2& x) const {
  return vt_dl_.eval(x) - vt_slo_.eval(x) + vt_slb_.eval(x);
}

double NeumannSolution::eval(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("evaluation outside the closed domain", x_user);
  // the inclusion-side gate matches the snap band of the conjugate pieces, so
  // conj_value dispatches consistently on either side of it
  const bool inner =
      (x - geo_.b.center).norm() <= geo_.b.radius * (1.0 + 1e-13);
  if (!inner) return c_out_ - conj_value(x);
  if (geo_.k.is_finite()) return c_in_ - conj_value(x) / geo_.k.value;
  if (geo_.k.kind == Conductivity::Kind::Insulating) return inner_ext_.eval_inside(x);
  return c_in_;  // perfectly conducting: equipotential inclusion
}

Vec2 NeumannSolution::grad(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("evaluation outside the closed domain", x_user);
  const double sdb = geo_.b.signed_distance(x);
  if (std::abs(sdb) <= 1e-13 * geo_.b.radius)
    return geo_.frame.vector_to_user(
        boundary_grad(1, angle_on(geo_.b, x), sdb >= 0.0 ? 1 : -1));
  const double sdo = geo_.omega().signed_distance(x);
  if (std::abs(sdo) <= 1e-13 * geo_.rho)
    return geo_.frame.vector_to_user(boundary_grad(2, std::atan2(x.y(), x.x()), -1));
  if (sdb < 0.0) {
    if (geo_.k.is_finite()) return Vec2(rot270(conj_.grad(x_user)) / geo_.k.value);
    if (geo_.k.kind == Conductivity::Kind::Insulating)
      return geo_.frame.vector_to_user(inner_ext_.grad_inside(x));
    return Vec2(0.0, 0.0);
  }
  return rot270(conj_.grad(x_user));
}

Region NeumannSolution::region(const Vec2& x_user) const {
  const Vec2 x = geo_.frame.to_canonical(x_user);
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("point outside the closed domain", x_user);
  return geo_.b.contains(x) ? Region::InsideB : Region::Annulus;
}

Vec2 NeumannSolution::boundary_grad(int circle, double theta, int side) const {
  const Vec2 nu(std::cos(theta), std::sin(theta));
  if (circle == 1) {
    const FourierCoeffs& nc = side >= 0 ? nb_out_ : nb_in_;
    return Vec2(fourier_at(nc, theta) * nu + fourier_at(tb_, theta) * rot90(nu));
  }
  if (circle != 2) throw ConfigError("circle index must be 1 (inclusion) or 2 (outer)");
  if (side >= 0) throw ConfigError("the outer circle has no trace outside the domain");
  return Vec2(fourier_at(no_in_, theta) * nu + fourier_at(to_, theta) * rot90(nu));
}

SupNormEstimate grad_sup_norm(const TwoDiskSolution& s, SupRegion region, int oversample) {
  if (region == SupRegion::Annulus || region == SupRegion::InsideB)
    throw ConfigError("region does not apply to the free-space problem");
  const TwoDiskGeometry& g = s.geometry();
  const int coarse = std::max(1, oversample) * s.densities().grid1.m;
  const double w1 = gap_window(g.eps, g.b1.radius);
  const double w2 = gap_window(g.eps, g.b2.radius);
  SupNormEstimate best;
  if (region == SupRegion::All || region == SupRegion::Exterior) {
    scan_trace([&](double th) { return s.boundary_grad(1, th, 1); }, g.b1, 0.0, w1,
               coarse, &best);
    scan_trace([&](double th) { return s.boundary_grad(2, th, 1); }, g.b2, kPi, w2,
               coarse, &best);
    // far-field floor: the layer gradients decay, so the exterior sup can be
    // attained at infinity where only the driver remains
    const Vec2 mid = 0.5 * (g.b1.center + g.b2.center);
    const double far = 100.0 * (g.b1.radius + g.b2.radius + g.eps);
    for (int j = 0; j < 256; ++j) {
      const double th = 2.0 * kPi * j / 256;
      const Vec2 x = mid + far * Vec2(std::cos(th), std::sin(th));
      const double a = s.driver().grad(x).norm();
      if (a > best.value) {
        best.value = a;
        best.location = x;
      }
    }
  }
  if (region == SupRegion::All || region == SupRegion::Inside1)
    scan_trace([&](double th) { return s.boundary_grad(1, th, -1); }, g.b1, 0.0, w1,
               coarse, &best);
  if (region == SupRegion::All || region == SupRegion::Inside2)
    scan_trace([&](double th) { return s.boundary_grad(2, th, -1); }, g.b2, kPi, w2,
               coarse, &best);
  best.location = g.frame.to_user(best.location);
  return best;
}

namespace {

// Shared scan for both disk-in-disk solutions; boundary_grad has the same
// shape on each.
template <class Solution>
SupNormEstimate disk_in_disk_sup(const Solution& s, SupRegion region, int oversample,
                                 int nodes) {
  if (region == SupRegion::Exterior || region == SupRegion::Inside1 ||
      region == SupRegion::Inside2)
    throw ConfigError("region does not apply to the bounded-domain problem");
  const DiskInDiskGeometry& g = s.geometry();
  const int coarse = std::max(1, oversample) * nodes;
  const double wb = gap_window(g.eps, g.b.radius);
  const double wo = gap_window(g.eps, g.rho);
  SupNormEstimate best;
  if (region == SupRegion::All || region == SupRegion::Annulus) {
    scan_trace([&](double th) { return s.boundary_grad(1, th, 1); }, g.b, 0.0, wb,
               coarse, &best);
    scan_trace([&](double th) { return s.boundary_grad(2, th, -1); }, g.omega(), 0.0,
               wo, coarse, &best);
  }
  if (region == SupRegion::All || region == SupRegion::InsideB)
    scan_trace([&](double th) { return s.boundary_grad(1, th, -1); }, g.b, 0.0, wb,
               coarse, &best);
  best.location = g.frame.to_user(best.location);
  return best;
}

}  // namespace

SupNormEstimate grad_sup_norm(const DirichletSolution& s, SupRegion region,
                              int oversample) {
  return disk_in_disk_sup(s, region, oversample, s.densities().grid_b.m);
}

SupNormEstimate grad_sup_norm(const NeumannSolution& s, SupRegion region,
                              int oversample) {
  return disk_in_disk_sup(s, region, oversample,
                          s.conjugate().densities().grid_b.m);
}

}  // namespace gapfield
