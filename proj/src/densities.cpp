#include "gapfield/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gapfield/common.hpp"

namespace gapfield {
namespace {

// One alternating reflection series: sum over pairs m of
//   ratio^m (T(even_m) + inner T(odd_m)),
// where T pulls the driver back through the accumulated reflections. The
// point orbit optionally takes a single lead step before the pairs; the
// anchor orbit of a value series never does.
struct OrbitPlan {
  const Disk* lead = nullptr;
  Disk a, b;           // pair steps, a first
  double ratio = 0.0;  // per-pair weight
  double inner = 0.0;  // weight of the odd-position evaluation (0 = skip)
  double cap = 0.0;    // certified bound on future pair ratios once observed
  int threshold = 0;
  double drive_sup = 0.0;  // sup |grad driver| over the orbit hull
  double floor = 0.0;      // absolute scale floor for the stop rule
  double tol = 1e-10;
};

constexpr int kPairHardCap = 4'000'000;

// Certified bound on the dropped remainder after `qm1` = q^(m+1) given the
// current weight w (a bound on the next term's magnitude seed). The
// geometric branch only needs pair products that never grow; the decay
// branch additionally needs future pair ratios to stay below the cap, which
// holds from the first crossing on.
double tail_bound(double q, double qm1, double w, bool below_cap, double cap) {
  double t = std::numeric_limits<double>::infinity();
  if (q < 1.0) t = w * qm1 / (1.0 - q);
  if (below_cap) t = std::min(t, w * qm1 / (1.0 - q * cap));
  return t;
}

[[noreturn]] void certification_failure() {
  throw NumericalError(
      "reflection series failed to certify its truncation tail");
}

Vec2 grad_series(const HarmonicField& f, const Vec2& start, const OrbitPlan& p,
                 SeriesTruncation* out) {
  ReflectionOrbit orb(start);
  if (p.lead) orb.step(*p.lead);
  const double q = std::abs(p.ratio);
  const double coef = (1.0 + std::abs(p.inner)) * p.drive_sup;
  Vec2 sum(0.0, 0.0);
  double rm = 1.0, qm = 1.0;
  double gp_prev = orb.gprod;
  bool below_cap = false;
  for (int m = 0; m < kPairHardCap; ++m) {
    Vec2 term = orb.jac.transpose() * f.grad(orb.y);
    orb.step(p.a);
    if (p.inner != 0.0) term += p.inner * (orb.jac.transpose() * f.grad(orb.y));
    orb.step(p.b);
    sum += rm * term;
    rm *= p.ratio;
    qm *= q;
    const double ratio_now = orb.gprod / gp_prev;
    gp_prev = orb.gprod;
    if (ratio_now <= p.cap) below_cap = true;
    const double tail = tail_bound(q, qm, coef * orb.gprod, below_cap, p.cap);
    if (tail <= p.tol * std::max(p.floor, sum.norm())) {
      if (out) *out = {m + 1, tail, p.tol, p.threshold, m + 1 <= p.threshold};
      return sum;
    }
  }
  certification_failure();
}

double value_series(const HarmonicField& f, const Vec2& start,
                    const Vec2& anchor, const OrbitPlan& p,
                    SeriesTruncation* out) {
  ReflectionOrbit pt(start);
  if (p.lead) pt.step(*p.lead);
  ReflectionOrbit an(anchor);
  const double q = std::abs(p.ratio);
  const double coef = (1.0 + std::abs(p.inner)) * p.drive_sup;
  double sum = 0.0, rm = 1.0, qm = 1.0;
  double dist_prev = (pt.y - an.y).norm();
  bool below_cap = false;
  for (int m = 0; m < kPairHardCap; ++m) {
    double term = f.eval(pt.y) - f.eval(an.y);
    pt.step(p.a);
    an.step(p.a);
    if (p.inner != 0.0) term += p.inner * (f.eval(pt.y) - f.eval(an.y));
    pt.step(p.b);
    an.step(p.b);
    sum += rm * term;
    rm *= p.ratio;
    qm *= q;
    const double dist = (pt.y - an.y).norm();
    if (dist_prev <= 0.0 || dist <= p.cap * dist_prev) below_cap = true;
    dist_prev = dist;
    const double tail = tail_bound(q, qm, coef * dist, below_cap, p.cap);
    if (tail <= p.tol * std::max(p.floor, std::abs(sum))) {
      if (out) *out = {m + 1, tail, p.tol, p.threshold, m + 1 <= p.threshold};
      return sum;
    }
  }
  certification_failure();
}

double effective_sigma(const Conductivity& k) {
  return k.is_trivial() ? 0.0 : k.sigma();
}

void check_gap_refusal(double coupling, double eps, double r_scale) {
  if (std::abs(coupling) >= 1.0 && eps < 1e-9 * r_scale)
    throw NumericalError(
        "degenerate coupling with a vanishing gap: the series tail cannot be "
        "certified below eps = 1e-9 r_min");
}

void check_drive(double sup) {
  if (!std::isfinite(sup))
    throw ConfigError("driver gradient bound must be finite over the domain");
}

SeriesTruncation zero_trunc(double tol, int threshold) {
  return {0, 0.0, tol, threshold, true};
}

}  // namespace

void SeriesTruncation::absorb(const SeriesTruncation& other) {
  terms = std::max(terms, other.terms);
  tail = std::max(tail, other.tail);
  tol = std::max(tol, other.tol);
  threshold = std::max(threshold, other.threshold);
  early = early && other.early;
}

TwoDiskSeries::TwoDiskSeries(const TwoDiskGeometry& geo, HarmonicField driver,
                             double tol)
    : geo_(geo), sc_(derived_scalars(geo)), driver_(std::move(driver)),
      tol_(tol) {
  if (!(tol_ > 0.0)) throw ConfigError("series tolerance must be positive");
  sig1_ = effective_sigma(geo_.k1);
  sig2_ = effective_sigma(geo_.k2);
  tau_ = sig1_ * sig2_;
  check_gap_refusal(tau_, geo_.eps, sc_.r_min);
  drive_sup_ = std::max(driver_.grad_sup_bound(geo_.b1),
                        driver_.grad_sup_bound(geo_.b2));
  check_drive(drive_sup_);
}

double TwoDiskSeries::sigma(int which) const {
  if (which != 1 && which != 2) throw ConfigError("disk index must be 1 or 2");
  return which == 1 ? sig1_ : sig2_;
}

const Disk& TwoDiskSeries::self(int which) const {
  if (which != 1 && which != 2) throw ConfigError("disk index must be 1 or 2");
  return which == 1 ? geo_.b1 : geo_.b2;
}

const Disk& TwoDiskSeries::other(int which) const {
  return which == 1 ? geo_.b2 : geo_.b1;
}

double TwoDiskSeries::psi(int which, const Vec2& x,
                          SeriesTruncation* tr) const {
  const Disk& s = self(which);
  const OrbitPlan p{nullptr,       other(which), s,
                    tau_,          -sigma(3 - which),
                    sc_.b * sc_.b, sc_.N,
                    drive_sup_,    drive_sup_,
                    tol_};
  return grad_series(driver_, x, p, tr).dot(s.normal_at(x));
}

double TwoDiskSeries::phi(int which, const Vec2& x,
                          SeriesTruncation* tr) const {
  const double sig = sigma(which);
  if (sig == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return 0.0;
  }
  return 2.0 * sig * psi(which, x, tr);
}

double TwoDiskSeries::layer_value(int which, const Vec2& x,
                                  SeriesTruncation* tr) const {
  const Disk& s = self(which);
  if (s.signed_distance(x) < -1e-13 * s.radius)
    throw DomainError("layer potential series is valid outside the disk", x);
  const double sig = sigma(which);
  if (sig == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return 0.0;
  }
  const OrbitPlan p{&s,
                    other(which),
                    s,
                    tau_,
                    -sigma(3 - which),
                    sc_.b * sc_.b,
                    sc_.N,
                    drive_sup_,
                    drive_sup_ * s.radius,
                    tol_};
  return -sig * value_series(driver_, x, s.center, p, tr);
}

Vec2 TwoDiskSeries::layer_grad(int which, const Vec2& x,
                               SeriesTruncation* tr) const {
  const Disk& s = self(which);
  if (s.signed_distance(x) < -1e-13 * s.radius)
    throw DomainError("layer potential series is valid outside the disk", x);
  const double sig = sigma(which);
  if (sig == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return Vec2(0.0, 0.0);
  }
  const OrbitPlan p{&s,           other(which), s,
                    tau_,         -sigma(3 - which),
                    sc_.b * sc_.b, sc_.N,
                    drive_sup_,   drive_sup_,
                    tol_};
  return -sig * grad_series(driver_, x, p, tr);
}

DiskInDiskSeries::DiskInDiskSeries(const DiskInDiskGeometry& geo,
                                   const FourierCoeffs& data, double tol)
    : geo_(geo), sc_(derived_scalars(geo)),
      dch_(double_layer_closed_form(geo.omega(), data)),
      dfield_(HarmonicField::layer(dch_)), tol_(tol) {
  if (!(tol_ > 0.0)) throw ConfigError("series tolerance must be positive");
  sig_ = effective_sigma(geo_.k);
  check_gap_refusal(sig_, geo_.eps, geo_.b.radius);
  data_mean_ = data.a0;
  drive_sup_ = dfield_.grad_sup_bound(geo_.b);
  check_drive(drive_sup_);
}

double DiskInDiskSeries::psi_b(const Vec2& x, SeriesTruncation* tr) const {
  const OrbitPlan p{nullptr,    geo_.omega(), geo_.b, sig_,  0.0,  sc_.b,
                    sc_.N,      drive_sup_,   drive_sup_,    tol_};
  return 2.0 * grad_series(dfield_, x, p, tr).dot(geo_.b.normal_at(x));
}

double DiskInDiskSeries::phi_b(const Vec2& x, SeriesTruncation* tr) const {
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return 0.0;
  }
  return 2.0 * sig_ * psi_b(x, tr);
}

double DiskInDiskSeries::g_omega(const Vec2& x, SeriesTruncation* tr) const {
  const Vec2 nu = geo_.omega().normal_at(x);
  const double direct = 2.0 * dch_.grad_inside(x).dot(nu);
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return direct;
  }
  return direct + 2.0 * layer_b_grad(x, tr).dot(nu);
}

double DiskInDiskSeries::layer_b_value(const Vec2& x,
                                       SeriesTruncation* tr) const {
  if (geo_.b.signed_distance(x) < -1e-13 * geo_.b.radius)
    throw DomainError("layer potential series is valid outside the inclusion",
                      x);
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return 0.0;
  }
  const OrbitPlan p{&geo_.b, geo_.omega(),    geo_.b,
                    sig_,    0.0,             sc_.b,
                    sc_.N,   drive_sup_,      drive_sup_ * geo_.b.radius,
                    tol_};
  return -2.0 * sig_ * value_series(dfield_, x, geo_.b.center, p, tr);
}

Vec2 DiskInDiskSeries::layer_b_grad(const Vec2& x, SeriesTruncation* tr) const {
  if (geo_.b.signed_distance(x) < -1e-13 * geo_.b.radius)
    throw DomainError("layer potential series is valid outside the inclusion",
                      x);
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return Vec2(0.0, 0.0);
  }
  const OrbitPlan p{&geo_.b, geo_.omega(), geo_.b, sig_,  0.0,  sc_.b,
                    sc_.N,   drive_sup_,   drive_sup_,     tol_};
  return -2.0 * sig_ * grad_series(dfield_, x, p, tr);
}

double DiskInDiskSeries::layer_omega_value(const Vec2& x,
                                           SeriesTruncation* tr) const {
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("outer layer series is valid inside the domain", x);
  const double direct = -dch_.eval_inside(x) + data_mean_;
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return direct;
  }
  return direct + layer_b_value(reflect(geo_.omega(), x), tr);
}

Vec2 DiskInDiskSeries::layer_omega_grad(const Vec2& x,
                                        SeriesTruncation* tr) const {
  if (geo_.omega().signed_distance(x) > 1e-13 * geo_.rho)
    throw DomainError("outer layer series is valid inside the domain", x);
  const Vec2 direct = -dch_.grad_inside(x);
  if (sig_ == 0.0) {
    if (tr) *tr = zero_trunc(tol_, sc_.N);
    return direct;
  }
  const Mat2 j = reflection_jacobian(geo_.omega(), x);
  return Vec2(direct +
              j.transpose() * layer_b_grad(reflect(geo_.omega(), x), tr));
}

TwoDiskDensities two_disk_densities(const TwoDiskSeries& s, int nodes) {
  TwoDiskDensities d{BoundaryGrid(s.geometry().b1, nodes),
                     BoundaryGrid(s.geometry().b2, nodes),
                     Eigen::VectorXd(nodes), Eigen::VectorXd(nodes),
                     Eigen::VectorXd(nodes), Eigen::VectorXd(nodes),
                     SeriesTruncation{}};
  d.trunc.tol = s.tolerance();
  d.trunc.early = true;
  std::vector<SeriesTruncation> tr1(nodes), tr2(nodes);
  parallel_for(static_cast<std::size_t>(nodes), [&](std::size_t j) {
    const int i = static_cast<int>(j);
    d.psi1[i] = s.psi(1, d.grid1.node(i), &tr1[j]);
    d.psi2[i] = s.psi(2, d.grid2.node(i), &tr2[j]);
  });
  for (int i = 0; i < nodes; ++i) {
    d.trunc.absorb(tr1[i]);
    d.trunc.absorb(tr2[i]);
  }
  d.phi1 = 2.0 * s.sigma(1) * d.psi1;
  d.phi2 = 2.0 * s.sigma(2) * d.psi2;
  d.phi1.array() -= d.phi1.mean();
  d.phi2.array() -= d.phi2.mean();
  return d;
}

DiskInDiskDensities disk_in_disk_densities(const DiskInDiskSeries& s,
                                           int nodes_b, int nodes_omega) {
  DiskInDiskDensities d{BoundaryGrid(s.geometry().b, nodes_b),
                        BoundaryGrid(s.geometry().omega(), nodes_omega),
                        Eigen::VectorXd(nodes_b), Eigen::VectorXd(nodes_b),
                        Eigen::VectorXd(nodes_omega), SeriesTruncation{}};
  d.trunc.tol = s.tolerance();
  d.trunc.early = true;
  std::vector<SeriesTruncation> trb(nodes_b), tro(nodes_omega);
  parallel_for(static_cast<std::size_t>(nodes_b), [&](std::size_t j) {
    d.psi_b[static_cast<int>(j)] = s.psi_b(d.grid_b.node(static_cast<int>(j)),
                                           &trb[j]);
  });
  parallel_for(static_cast<std::size_t>(nodes_omega), [&](std::size_t j) {
    d.g[static_cast<int>(j)] = s.g_omega(d.grid_omega.node(static_cast<int>(j)),
                                         &tro[j]);
  });
  for (auto& t : trb) d.trunc.absorb(t);
  for (auto& t : tro) d.trunc.absorb(t);
  d.phi_b = 2.0 * s.sigma() * d.psi_b;
  d.phi_b.array() -= d.phi_b.mean();
  d.g.array() -= d.g.mean();
  return d;
}

double two_disk_residual(const HarmonicField& driver,
                         const TwoDiskDensities& d) {
  const double scale =
      std::max({d.psi1.cwiseAbs().maxCoeff(), d.psi2.cwiseAbs().maxCoeff(),
                1e-300});
  double worst = 0.0;
  for (int j = 0; j < d.grid1.m; ++j) {
    const Vec2 x = d.grid1.node(j);
    const Vec2 nu = d.grid1.normal(j);
    const double rhs = driver.grad(x).dot(nu) +
                       single_layer_grad(d.grid2, d.phi2, x).dot(nu);
    worst = std::max(worst, std::abs(d.psi1[j] - rhs));
  }
  for (int j = 0; j < d.grid2.m; ++j) {
    const Vec2 x = d.grid2.node(j);
    const Vec2 nu = d.grid2.normal(j);
    const double rhs = driver.grad(x).dot(nu) +
                       single_layer_grad(d.grid1, d.phi1, x).dot(nu);
    worst = std::max(worst, std::abs(d.psi2[j] - rhs));
  }
  return worst / scale;
}

double disk_in_disk_residual(const DiskInDiskGeometry& geo,
                             const FourierCoeffs& data,
                             const DiskInDiskDensities& d) {
  const CircleHarmonics dl = double_layer_closed_form(geo.omega(), data);
  const Eigen::VectorXd f = from_fourier(d.grid_omega, data);
  const double scale = std::max({d.psi_b.cwiseAbs().maxCoeff(),
                                 f.cwiseAbs().maxCoeff(), 1e-300});

  // density equation on the inner circle
  double worst = 0.0;
  for (int j = 0; j < d.grid_b.m; ++j) {
    const Vec2 x = d.grid_b.node(j);
    const Vec2 nu = d.grid_b.normal(j);
    const double rhs = dl.grad_inside(x).dot(nu) -
                       single_layer_grad(d.grid_omega, d.g, x).dot(nu);
    worst = std::max(worst, std::abs(d.psi_b[j] - rhs));
  }

  // Dirichlet condition on the outer circle
  const Eigen::VectorXd s_surf = single_layer_on_surface(d.grid_omega, d.g);
  for (int j = 0; j < d.grid_omega.m; ++j) {
    const Vec2 x = d.grid_omega.node(j);
    const double u = 0.5 * (f[j] + data.a0) - s_surf[j] +
                     single_layer_eval(d.grid_b, d.phi_b, x);
    worst = std::max(worst, std::abs(u - f[j]));
  }
  return worst / scale;
}

}  // namespace gapfield
