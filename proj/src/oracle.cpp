#include "gapfield/oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "gapfield/common.hpp"

namespace gapfield {
namespace {

// Analysis matrix of the even-degree trigonometric interpolant on the grid:
// maps node values to [a_0, a_1..a_{m/2}, b_1..b_{m/2-1}], Nyquist cosine at
// half weight so the interpolant matches the data at every node. Square.
Eigen::MatrixXd trig_analysis(const BoundaryGrid& g) {
  const int m = g.m, half = m / 2;
  Eigen::MatrixXd c(m, m);
  for (int q = 0; q < m; ++q) {
    const double th = g.theta(q);
    c(0, q) = 1.0 / m;
    for (int n = 1; n <= half; ++n)
      c(n, q) = (n == half ? 1.0 : 2.0) * std::cos(n * th) / m;
    for (int n = 1; n < half; ++n) c(half + n, q) = 2.0 * std::sin(n * th) / m;
  }
  return c;
}

// d/dnu(x_p) of the single layer (kernel (1/2pi) ln|x-y|) on the column circle
// carrying one trigonometric density mode per column, in closed form. Row
// points must lie strictly outside (exterior) or strictly inside the column
// circle; the power series in r/zeta resp. zeta/r is exact there. Density
// cos(n t) produces the potential -(r/2n) Re (r/zeta)^n outside and
// -(r/2n) Re (zeta/r)^n inside; a constant density produces the point-charge
// field r ln|zeta| outside and a constant inside.
Eigen::MatrixXd mode_gradient_block(const BoundaryGrid& rows, const BoundaryGrid& cols,
                                    bool exterior) {
  const int half = cols.m / 2;
  const double r = cols.disk.radius;
  Eigen::MatrixXd gmat(rows.m, cols.m);
  parallel_for(static_cast<std::size_t>(rows.m), [&](std::size_t pp) {
    const int p = static_cast<int>(pp);
    const Vec2 x = rows.node(p);
    const Vec2 nu = rows.normal(p);
    const Cplx zeta(x.x() - cols.disk.center.x(), x.y() - cols.disk.center.y());
    const Cplx w = exterior ? Cplx(r) / zeta : zeta / r;  // |w| < 1 both ways
    gmat(p, 0) = exterior ? (Cplx(r) / zeta).real() * nu.x() -
                                (Cplx(r) / zeta).imag() * nu.y()
                          : 0.0;
    // complex derivative of the cosine-mode potential: +w^{n+1}/2 outside,
    // -w^{n-1}/2 inside; grad Re f = (Re f', -Im f'), grad Im f = (Im f', Re f').
    // Outside, (r/zeta)^n carries e^{-in arg zeta}, so the sine-mode potential
    // is -Im f rather than +Im f; inside, (zeta/r)^n keeps the angle sign.
    const double sin_sign = exterior ? -1.0 : 1.0;
    Cplx pw = exterior ? w * w : Cplx(1.0);
    for (int n = 1; n <= half; ++n) {
      const Cplx fp = exterior ? 0.5 * pw : -0.5 * pw;
      gmat(p, n) = fp.real() * nu.x() - fp.imag() * nu.y();
      if (n < half)
        gmat(p, half + n) = sin_sign * (fp.imag() * nu.x() + fp.real() * nu.y());
      pw *= w;
    }
  });
  return gmat;
}

// Operator matrix on node values: exact gradient response of each density
// mode, composed with the interpolant analysis. No quadrature error enters;
// the discretization error is the density's own trigonometric tail.
Eigen::MatrixXd cross_block(const BoundaryGrid& rows, const BoundaryGrid& cols,
                            bool exterior) {
  return mode_gradient_block(rows, cols, exterior) * trig_analysis(cols);
}

void project_mean(Eigen::VectorXd& v) {
  if (v.size() > 0) v.array() -= v.mean();
}

// Direct solve with a condition estimate; above the limit, re-solve the
// bordered system that pins the per-circle means to zero instead of relying
// on the unconstrained solution.
struct SolveReport {
  double cond = 0.0;
  bool degraded = false;
};

Eigen::VectorXd solve_with_fallback(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                    const std::vector<std::pair<int, const BoundaryGrid*>>& blocks,
                                    double cond_limit, SolveReport* report) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const double rcond = lu.rcond();
  report->cond = 1.0 / std::max(rcond, std::numeric_limits<double>::min());
  if (rcond > 0.0 && report->cond <= cond_limit) {
    report->degraded = false;
    return lu.solve(b);
  }
  report->degraded = true;
  const int n = static_cast<int>(a.rows());
  const int k = static_cast<int>(blocks.size());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + k, n + k);
  aug.topLeftCorner(n, n) = a;
  for (int j = 0; j < k; ++j) {
    const auto& [offset, grid] = blocks[static_cast<std::size_t>(j)];
    const double w = grid->arc_weight();
    for (int p = 0; p < grid->m; ++p) {
      aug(offset + p, n + j) = w;
      aug(n + j, offset + p) = w;
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + k);
  rhs.head(n) = b;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(aug).solve(rhs).head(n);
}

Eigen::VectorXd sample_normal_derivative(const BoundaryGrid& g,
                                         const std::function<Vec2(const Vec2&)>& grad) {
  Eigen::VectorXd v(g.m);
  parallel_for(static_cast<std::size_t>(g.m), [&](std::size_t p) {
    const int j = static_cast<int>(p);
    v(j) = grad(g.node(j)).dot(g.normal(j));
  });
  return v;
}

}  // namespace

TwoDiskOracle nystrom_two_disks(const TwoDiskGeometry& g, const HarmonicField& driver,
                                int nodes, double cond_limit) {
  if (driver.empty()) throw ConfigError("nystrom_two_disks: empty driver");
  TwoDiskOracle out{BoundaryGrid(g.b1, nodes), BoundaryGrid(g.b2, nodes),
                    Eigen::VectorXd::Zero(nodes), Eigen::VectorXd::Zero(nodes),
                    0.0, false};
  const bool active1 = !g.k1.is_trivial();
  const bool active2 = !g.k2.is_trivial();
  if (!active1 && !active2) return out;

  auto dn = [&](const Vec2& x) { return driver.grad(x); };
  const Eigen::VectorXd b1 = sample_normal_derivative(out.grid1, dn);
  const Eigen::VectorXd b2 = sample_normal_derivative(out.grid2, dn);

  SolveReport report;
  if (active1 && active2) {
    const int m = nodes;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    a.topLeftCorner(m, m) = g.k1.lambda() * Eigen::MatrixXd::Identity(m, m);
    a.bottomRightCorner(m, m) = g.k2.lambda() * Eigen::MatrixXd::Identity(m, m);
    a.topRightCorner(m, m) = -cross_block(out.grid1, out.grid2, true);
    a.bottomLeftCorner(m, m) = -cross_block(out.grid2, out.grid1, true);
    Eigen::VectorXd b(2 * m);
    b.head(m) = b1;
    b.tail(m) = b2;
    const Eigen::VectorXd phi = solve_with_fallback(
        a, b, {{0, &out.grid1}, {m, &out.grid2}}, cond_limit, &report);
    out.phi1 = phi.head(m);
    out.phi2 = phi.tail(m);
  } else {
    // one trivial circle: the coupling vanishes and the active equation is
    // diagonal, lambda*phi = dH/dnu
    if (active1) out.phi1 = b1 / g.k1.lambda();
    if (active2) out.phi2 = b2 / g.k2.lambda();
    report.cond = 1.0;
  }
  project_mean(out.phi1);
  project_mean(out.phi2);
  out.cond = report.cond;
  out.degraded = report.degraded;
  return out;
}

DiskInDiskOracle nystrom_disk_in_disk(const DiskInDiskGeometry& g,
                                      const FourierCoeffs& data, int nodes_omega,
                                      int nodes_b, double cond_limit) {
  DiskInDiskOracle out{BoundaryGrid(g.omega(), nodes_omega), BoundaryGrid(g.b, nodes_b),
                       Eigen::VectorXd::Zero(nodes_omega),
                       Eigen::VectorXd::Zero(nodes_b), 0.0, false};
  const CircleHarmonics dl = double_layer_closed_form(g.omega(), data);
  auto dn = [&](const Vec2& x) { return dl.grad_inside(x); };
  const Eigen::VectorXd b_omega = sample_normal_derivative(out.grid_omega, dn);
  const Eigen::VectorXd b_b = sample_normal_derivative(out.grid_b, dn);

  SolveReport report;
  if (g.k.is_trivial()) {
    out.g = 2.0 * b_omega;
    report.cond = 1.0;
  } else {
    const int mo = nodes_omega, mb = nodes_b;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(mo + mb, mo + mb);
    a.topLeftCorner(mo, mo) = 0.5 * Eigen::MatrixXd::Identity(mo, mo);
    a.bottomRightCorner(mb, mb) = g.k.lambda() * Eigen::MatrixXd::Identity(mb, mb);
    a.topRightCorner(mo, mb) = -cross_block(out.grid_omega, out.grid_b, true);
    a.bottomLeftCorner(mb, mo) = cross_block(out.grid_b, out.grid_omega, false);
    Eigen::VectorXd b(mo + mb);
    b.head(mo) = b_omega;
    b.tail(mb) = b_b;
    const Eigen::VectorXd sol = solve_with_fallback(
        a, b, {{0, &out.grid_omega}, {mo, &out.grid_b}}, cond_limit, &report);
    out.g = sol.head(mo);
    out.phi_b = sol.tail(mb);
  }
  project_mean(out.g);
  project_mean(out.phi_b);
  out.cond = report.cond;
  out.degraded = report.degraded;
  return out;
}

double SingleInclusionSolution::eval(const Vec2& x) const {
  const Vec2 zeta = Vec2(x - disk.center);
  const double r2 = zeta.squaredNorm();
  if (r2 <= disk.radius * disk.radius * (1.0 + 1e-13)) {
    return (1.0 - sigma) * a.dot(zeta) + a.dot(disk.center) + c;
  }
  return a.dot(x) + c - sigma * disk.radius * disk.radius * a.dot(zeta) / r2;
}

Vec2 SingleInclusionSolution::grad(const Vec2& x) const {
  const Vec2 zeta = Vec2(x - disk.center);
  const double r2 = zeta.squaredNorm();
  if (r2 <= disk.radius * disk.radius * (1.0 + 1e-13)) return Vec2((1.0 - sigma) * a);
  // grad of a.zeta/|zeta|^2 = (a |zeta|^2 - 2 (a.zeta) zeta)/|zeta|^4
  const Vec2 dip = Vec2((a * r2 - 2.0 * a.dot(zeta) * zeta) / (r2 * r2));
  return Vec2(a - sigma * disk.radius * disk.radius * dip);
}

SingleInclusionSolution single_inclusion_closed_form(const Disk& d, Conductivity k,
                                                     const Vec2& a, double c) {
  return SingleInclusionSolution{d, k.is_trivial() ? 0.0 : k.sigma(), a, c};
}

double harmonic_residual(const std::function<double(const Vec2&)>& u, const Vec2& x,
                         double h, double grad_floor) {
  if (!(h > 0.0)) throw ConfigError("harmonic_residual: step must be positive");
  const double ue = u(Vec2(x.x() + h, x.y()));
  const double uw = u(Vec2(x.x() - h, x.y()));
  const double un = u(Vec2(x.x(), x.y() + h));
  const double us = u(Vec2(x.x(), x.y() - h));
  const double uc = u(x);
  const double defect = std::abs(ue + uw + un + us - 4.0 * uc);
  const double gx = (ue - uw) / (2.0 * h);
  const double gy = (un - us) / (2.0 * h);
  const double scale = std::max(std::hypot(gx, gy), grad_floor);
  if (!(scale > 0.0))
    throw ConfigError("harmonic_residual: zero gradient scale, pass a positive floor");
  return defect / (4.0 * h * scale);
}

double max_harmonic_residual(const std::function<double(const Vec2&)>& u,
                             const std::vector<Vec2>& points,
                             const std::vector<Disk>& interfaces, double h,
                             double grad_floor, int* skipped) {
  double worst = 0.0;
  int skip = 0;
  for (const Vec2& x : points) {
    bool near = false;
    for (const Disk& d : interfaces)
      if (std::abs(d.signed_distance(x)) < 5.0 * h) near = true;
    if (near) {
      ++skip;
      continue;
    }
    worst = std::max(worst, harmonic_residual(u, x, h, grad_floor));
  }
  if (skipped) *skipped = skip;
  return worst;
}

}  // namespace gapfield
