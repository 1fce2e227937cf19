#include "gapfield/potentials.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <vector>

namespace gapfield {

namespace {

bool is_pow2(int m) { return m > 0 && (m & (m - 1)) == 0; }

std::vector<Cplx> spectrum_of(const Eigen::VectorXd& v) {
  Eigen::FFT<double> fft;
  std::vector<double> in(v.data(), v.data() + v.size());
  std::vector<Cplx> out;
  fft.fwd(out, in);
  return out;
}

Eigen::VectorXd values_of(std::vector<Cplx>& spec) {
  Eigen::FFT<double> fft;
  std::vector<double> out;
  fft.inv(out, spec);
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<long>(out.size()));
}

}  // namespace

BoundaryGrid::BoundaryGrid(const Disk& d, int m_nodes) : disk(d), m(m_nodes) {
  if (!is_pow2(m) || m < 16)
    throw ConfigError("boundary grid size must be a power of two, at least 16");
}

Eigen::VectorXd grid_sample(const BoundaryGrid& g, const std::function<double(double)>& f) {
  Eigen::VectorXd v(g.m);
  for (int j = 0; j < g.m; ++j) v[j] = f(g.theta(j));
  return v;
}

double grid_mean(const BoundaryGrid& g, const Eigen::VectorXd& v) { return v.sum() / g.m; }

FourierCoeffs to_fourier(const BoundaryGrid& g, const Eigen::VectorXd& v) {
  const auto spec = spectrum_of(v);
  const int m = g.m;
  FourierCoeffs c;
  c.a0 = spec[0].real() / m;
  c.ac.assign(m / 2, 0.0);
  c.as.assign(m / 2, 0.0);
  for (int n = 1; n < m / 2; ++n) {
    c.ac[n - 1] = 2.0 * spec[n].real() / m;
    c.as[n - 1] = -2.0 * spec[n].imag() / m;
  }
  c.ac[m / 2 - 1] = spec[m / 2].real() / m;  // Nyquist kept as pure cosine
  return c;
}

Eigen::VectorXd from_fourier(const BoundaryGrid& g, const FourierCoeffs& c) {
  const int m = g.m;
  if (c.modes() > m / 2)
    throw ConfigError("from_fourier: coefficient bandwidth exceeds the grid Nyquist");
  std::vector<Cplx> spec(m, Cplx(0.0, 0.0));
  spec[0] = Cplx(c.a0 * m, 0.0);
  const int top = std::min(c.modes(), m / 2 - 1);
  for (int n = 1; n <= top; ++n) {
    const Cplx half(0.5 * c.cosc(n) * m, -0.5 * c.sinc(n) * m);
    spec[n] = half;
    spec[m - n] = std::conj(half);
  }
  if (c.modes() == m / 2) spec[m / 2] = Cplx(c.cosc(m / 2) * m, 0.0);
  return values_of(spec);
}

std::pair<BoundaryGrid, Eigen::VectorXd> upsample(const BoundaryGrid& g, const Eigen::VectorXd& v,
                                                  int factor) {
  if (!is_pow2(factor)) throw ConfigError("upsample factor must be a power of two");
  if (factor == 1) return {g, v};
  const int m = g.m;
  const int mu = m * factor;
  const auto spec = spectrum_of(v);
  std::vector<Cplx> spec2(mu, Cplx(0.0, 0.0));
  const double scale = factor;
  spec2[0] = spec[0] * scale;
  for (int n = 1; n < m / 2; ++n) {
    spec2[n] = spec[n] * scale;
    spec2[mu - n] = spec[m - n] * scale;
  }
  // Split the Nyquist bin symmetrically so the resampled signal stays real.
  spec2[m / 2] = 0.5 * scale * spec[m / 2];
  spec2[mu - m / 2] = 0.5 * scale * std::conj(spec[m / 2]);
  Eigen::VectorXd fine = values_of(spec2);
  return {BoundaryGrid(g.disk, mu), std::move(fine)};
}

Eigen::VectorXd tangential_derivative(const BoundaryGrid& g, const Eigen::VectorXd& v) {
  const int m = g.m;
  auto spec = spectrum_of(v);
  spec[0] = Cplx(0.0, 0.0);
  for (int n = 1; n < m / 2; ++n) {
    const Cplx in(0.0, static_cast<double>(n));
    spec[n] *= in;
    spec[m - n] *= -in;
  }
  spec[m / 2] = Cplx(0.0, 0.0);  // cosine Nyquist mode differentiates to zero at nodes
  Eigen::VectorXd dtheta = values_of(spec);
  return dtheta / g.disk.radius;
}

Eigen::VectorXd tangential_antiderivative(const BoundaryGrid& g, const Eigen::VectorXd& v) {
  const int m = g.m;
  auto spec = spectrum_of(v);
  const double mean = std::abs(spec[0].real()) / m;
  const double scale = v.cwiseAbs().maxCoeff();
  if (mean > 1e-10 * std::max(1.0, scale))
    throw NumericalError("tangential antiderivative requires mean-zero data");
  spec[0] = Cplx(0.0, 0.0);
  for (int n = 1; n < m / 2; ++n) {
    const Cplx in(0.0, static_cast<double>(n));
    spec[n] /= in;
    spec[m - n] /= -in;
  }
  spec[m / 2] = Cplx(0.0, 0.0);
  Eigen::VectorXd antitheta = values_of(spec);
  return antitheta * g.disk.radius;
}

double kstar_apply_mean(const BoundaryGrid& g, const Eigen::VectorXd& density) {
  return 0.5 * grid_mean(g, density);
}

CircleHarmonics single_layer_harmonics(const BoundaryGrid& g, const Eigen::VectorXd& density) {
  return single_layer_closed_form(g.disk, to_fourier(g, density));
}

CircleHarmonics double_layer_harmonics(const BoundaryGrid& g, const Eigen::VectorXd& data) {
  return double_layer_closed_form(g.disk, to_fourier(g, data));
}

namespace {

// Near-boundary dispatch: 0 means "on the circle", factor > 64 means "use the
// Fourier route", otherwise quadrature at the returned upsampling factor.
int dispatch_factor(const BoundaryGrid& g, const Vec2& x) {
  const double r = g.disk.radius;
  const double dist = std::abs(g.disk.signed_distance(x));
  if (dist <= 1e-13 * r) return 0;
  const double h0 = 2.0 * kPi * r / g.m;
  int factor = 1;
  while (factor <= 64 && h0 / factor >= dist / 5.0) factor <<= 1;
  return factor;
}

template <class Kernel>
double quad_scalar(const BoundaryGrid& g, const Eigen::VectorXd& v, Kernel&& k) {
  double acc = 0.0;
  for (int j = 0; j < g.m; ++j) acc += v[j] * k(g.node(j), g.normal(j));
  return acc * (g.arc_weight() / (2.0 * kPi));
}

template <class Kernel>
Vec2 quad_vector(const BoundaryGrid& g, const Eigen::VectorXd& v, Kernel&& k) {
  Vec2 acc(0.0, 0.0);
  for (int j = 0; j < g.m; ++j) acc += v[j] * k(g.node(j), g.normal(j));
  return acc * (g.arc_weight() / (2.0 * kPi));
}

}  // namespace

double single_layer_eval(const BoundaryGrid& g, const Eigen::VectorXd& density, const Vec2& x) {
  const int factor = dispatch_factor(g, x);
  if (factor == 0) return single_layer_harmonics(g, density).eval_inside(x);
  if (factor > 64) return single_layer_harmonics(g, density).eval(x);
  auto [fine, vf] = upsample(g, density, factor);
  return quad_scalar(fine, vf, [&](const Vec2& y, const Vec2&) { return std::log((x - y).norm()); });
}

Vec2 single_layer_grad(const BoundaryGrid& g, const Eigen::VectorXd& density, const Vec2& x) {
  const int factor = dispatch_factor(g, x);
  if (factor == 0) return single_layer_harmonics(g, density).grad_inside(x);
  if (factor > 64) return single_layer_harmonics(g, density).grad(x);
  auto [fine, vf] = upsample(g, density, factor);
  return quad_vector(fine, vf,
                  [&](const Vec2& y, const Vec2&) { return Vec2((x - y) / (x - y).squaredNorm()); });
}

double double_layer_eval(const BoundaryGrid& g, const Eigen::VectorXd& data, const Vec2& x) {
  const int factor = dispatch_factor(g, x);
  if (factor == 0) return double_layer_harmonics(g, data).eval_inside(x);
  if (factor > 64) return double_layer_harmonics(g, data).eval(x);
  auto [fine, vf] = upsample(g, data, factor);
  return quad_scalar(fine, vf, [&](const Vec2& y, const Vec2& nu) {
    return (y - x).dot(nu) / (x - y).squaredNorm();
  });
}

Vec2 double_layer_grad(const BoundaryGrid& g, const Eigen::VectorXd& data, const Vec2& x) {
  const int factor = dispatch_factor(g, x);
  if (factor == 0) return double_layer_harmonics(g, data).grad_inside(x);
  if (factor > 64) return double_layer_harmonics(g, data).grad(x);
  auto [fine, vf] = upsample(g, data, factor);
  return quad_vector(fine, vf, [&](const Vec2& y, const Vec2& nu) {
    const Vec2 d = x - y;
    const double d2 = d.squaredNorm();
    return Vec2(-nu / d2 + (2.0 * d.dot(nu) / (d2 * d2)) * d);
  });
}

Eigen::VectorXd single_layer_on_surface(const BoundaryGrid& g, const Eigen::VectorXd& density) {
  const int m = g.m;
  const double r = g.disk.radius;
  auto spec = spectrum_of(density);
  spec[0] *= r * std::log(r);
  for (int n = 1; n < m / 2; ++n) {
    const double mult = -r / (2.0 * n);
    spec[n] *= mult;
    spec[m - n] *= mult;
  }
  spec[m / 2] *= -r / static_cast<double>(m);
  return values_of(spec);
}

}  // namespace gapfield
