#include "gapfield/fields.hpp"

#include <cmath>
#include <variant>

namespace gapfield {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// z^n by squaring; n != 0.
Cplx cpow_int(const Cplx& z, int n) {
  unsigned long m = n < 0 ? -static_cast<long>(n) : n;
  Cplx acc(1.0, 0.0), base = z;
  while (m != 0) {
    if (m & 1) acc *= base;
    base *= base;
    m >>= 1;
  }
  return n < 0 ? Cplx(1.0, 0.0) / acc : acc;
}

Cplx zeta_of(const Vec2& center, const Vec2& x) {
  return Cplx(x.x() - center.x(), x.y() - center.y());
}

// grad Re(F) = (Re F', -Im F') for holomorphic F.
Vec2 grad_of_deriv(const Cplx& fp) { return Vec2(fp.real(), -fp.imag()); }

}  // namespace

double CircleHarmonics::eval_inside(const Vec2& x) const {
  const Cplx z = zeta_of(disk.center, x);
  Cplx acc(0.0, 0.0);
  for (size_t i = cin.size(); i-- > 0;) acc = (acc + cin[i]) * z;
  return cin0 + acc.real();
}

Vec2 CircleHarmonics::grad_inside(const Vec2& x) const {
  const Cplx z = zeta_of(disk.center, x);
  Cplx acc(0.0, 0.0);
  for (size_t i = cin.size(); i-- > 0;) acc = acc * z + (static_cast<double>(i + 1)) * cin[i];
  return grad_of_deriv(acc);
}

double CircleHarmonics::eval_outside(const Vec2& x) const {
  const Cplx z = zeta_of(disk.center, x);
  const double s2 = std::norm(z);
  if (s2 == 0.0) throw DomainError("outside-branch evaluation at the circle center", x);
  const Cplx w = Cplx(1.0, 0.0) / z;
  Cplx acc(0.0, 0.0);
  for (size_t i = cout.size(); i-- > 0;) acc = (acc + cout[i]) * w;
  return cout0 + 0.5 * clog * std::log(s2) + acc.real();
}

Vec2 CircleHarmonics::grad_outside(const Vec2& x) const {
  const Cplx z = zeta_of(disk.center, x);
  const double s2 = std::norm(z);
  if (s2 == 0.0) throw DomainError("outside-branch evaluation at the circle center", x);
  const Cplx w = Cplx(1.0, 0.0) / z;
  Cplx acc(0.0, 0.0);
  for (size_t i = cout.size(); i-- > 0;) acc = acc * w + (static_cast<double>(i + 1)) * cout[i];
  const Cplx fp = -acc * w * w;
  Vec2 g = grad_of_deriv(fp);
  g += (clog / s2) * Vec2(z.real(), z.imag());
  return g;
}

CircleHarmonics CircleHarmonics::conjugate() const {
  if (clog != 0.0)
    throw NumericalError("harmonic conjugate of a field with net charge is multivalued");
  CircleHarmonics out;
  out.disk = disk;
  out.cin.reserve(cin.size());
  out.cout.reserve(cout.size());
  const Cplx mi(0.0, -1.0);
  for (const Cplx& c : cin) out.cin.push_back(mi * c);
  for (const Cplx& c : cout) out.cout.push_back(mi * c);
  return out;
}

CircleHarmonics single_layer_closed_form(const Disk& d, const FourierCoeffs& density) {
  CircleHarmonics ch;
  ch.disk = d;
  const double r = d.radius;
  const int n_modes = density.modes();
  ch.cin.assign(n_modes, Cplx(0.0, 0.0));
  ch.cout.assign(n_modes, Cplx(0.0, 0.0));
  ch.cin0 = density.a0 * r * std::log(r);
  ch.clog = density.a0 * r;
  double rn = 1.0;
  for (int n = 1; n <= n_modes; ++n) {
    rn *= r;
    const double fac = -r / (2.0 * n);
    ch.cin[n - 1] = fac * Cplx(density.cosc(n), -density.sinc(n)) / rn;
    ch.cout[n - 1] = fac * rn * Cplx(density.cosc(n), density.sinc(n));
  }
  return ch;
}

CircleHarmonics double_layer_closed_form(const Disk& d, const FourierCoeffs& data) {
  CircleHarmonics ch;
  ch.disk = d;
  const double r = d.radius;
  const int n_modes = data.modes();
  ch.cin.assign(n_modes, Cplx(0.0, 0.0));
  ch.cout.assign(n_modes, Cplx(0.0, 0.0));
  ch.cin0 = data.a0;
  double rn = 1.0;
  for (int n = 1; n <= n_modes; ++n) {
    rn *= r;
    ch.cin[n - 1] = 0.5 * Cplx(data.cosc(n), -data.sinc(n)) / rn;
    ch.cout[n - 1] = -0.5 * rn * Cplx(data.cosc(n), data.sinc(n));
  }
  return ch;
}

CircleHarmonics interior_extension_closed_form(const Disk& d, const FourierCoeffs& data) {
  CircleHarmonics ch;
  ch.disk = d;
  const double r = d.radius;
  const int n_modes = data.modes();
  ch.cin.assign(n_modes, Cplx(0.0, 0.0));
  ch.cin0 = data.a0;
  double rn = 1.0;
  for (int n = 1; n <= n_modes; ++n) {
    rn *= r;
    ch.cin[n - 1] = Cplx(data.cosc(n), -data.sinc(n)) / rn;
  }
  return ch;
}

struct AffineNode {
  Vec2 a;
  double c;
};
struct PolyNode {
  Vec2 center;
  int n;
  Cplx coef;
};
struct SumNode {
  std::vector<HarmonicField> terms;
};
struct ScaleNode {
  double s;
  HarmonicField base;
};
struct PullbackNode {
  HarmonicField base;
  Disk disk;
};
struct LayerNode {
  CircleHarmonics ch;
};

struct Node {
  std::variant<AffineNode, PolyNode, SumNode, ScaleNode, PullbackNode, LayerNode> v;
};

HarmonicField HarmonicField::affine(const Vec2& a, double c) {
  return HarmonicField(std::make_shared<const Node>(Node{AffineNode{a, c}}));
}

HarmonicField HarmonicField::poly(const Vec2& center, int n, Cplx coef) {
  if (n == 0) throw ConfigError("poly degree must be nonzero; use affine for constants");
  return HarmonicField(std::make_shared<const Node>(Node{PolyNode{center, n, coef}}));
}

HarmonicField HarmonicField::sum(std::vector<HarmonicField> terms) {
  return HarmonicField(std::make_shared<const Node>(Node{SumNode{std::move(terms)}}));
}

HarmonicField HarmonicField::scale(double s, HarmonicField base) {
  return HarmonicField(std::make_shared<const Node>(Node{ScaleNode{s, std::move(base)}}));
}

HarmonicField HarmonicField::pullback(HarmonicField base, const Disk& d) {
  return HarmonicField(std::make_shared<const Node>(Node{PullbackNode{std::move(base), d}}));
}

HarmonicField HarmonicField::layer(CircleHarmonics ch) {
  return HarmonicField(std::make_shared<const Node>(Node{LayerNode{std::move(ch)}}));
}

double HarmonicField::eval(const Vec2& x) const {
  if (!node_) return 0.0;
  return std::visit(
      Overloaded{
          [&](const AffineNode& n) { return n.a.dot(x) + n.c; },
          [&](const PolyNode& n) {
            const Cplx z = zeta_of(n.center, x);
            if (n.n < 0 && std::norm(z) == 0.0)
              throw DomainError("multipole evaluated at its center", x);
            return (n.coef * cpow_int(z, n.n)).real();
          },
          [&](const SumNode& n) {
            double s = 0.0;
            for (const auto& t : n.terms) s += t.eval(x);
            return s;
          },
          [&](const ScaleNode& n) { return n.s * n.base.eval(x); },
          [&](const PullbackNode& n) { return n.base.eval(reflect(n.disk, x)); },
          [&](const LayerNode& n) { return n.ch.eval(x); },
      },
      node_->v);
}

Vec2 HarmonicField::grad(const Vec2& x) const {
  if (!node_) return Vec2(0.0, 0.0);
  return std::visit(
      Overloaded{
          [&](const AffineNode& n) { return n.a; },
          [&](const PolyNode& n) {
            const Cplx z = zeta_of(n.center, x);
            if (n.n < 0 && std::norm(z) == 0.0)
              throw DomainError("multipole gradient at its center", x);
            const Cplx fp = n.coef * static_cast<double>(n.n) * cpow_int(z, n.n - 1);
            return grad_of_deriv(fp);
          },
          [&](const SumNode& n) {
            Vec2 g(0.0, 0.0);
            for (const auto& t : n.terms) g += t.grad(x);
            return g;
          },
          [&](const ScaleNode& n) { return Vec2(n.s * n.base.grad(x)); },
          [&](const PullbackNode& n) {
            const Vec2 y = reflect(n.disk, x);
            const Mat2 j = reflection_jacobian(n.disk, x);
            return Vec2(j.transpose() * n.base.grad(y));
          },
          [&](const LayerNode& n) { return n.ch.grad(x); },
      },
      node_->v);
}

namespace {

double layer_grad_sup(const CircleHarmonics& ch, const Disk& region) {
  const double dc = (region.center - ch.disk.center).norm();
  const double r = ch.disk.radius;
  double bound = 0.0;
  if (dc - region.radius < r) {
    const double smax = std::min(dc + region.radius, r);
    double b = 0.0, sp = 1.0;
    for (size_t i = 0; i < ch.cin.size(); ++i) {
      b += (static_cast<double>(i + 1)) * std::abs(ch.cin[i]) * sp;
      sp *= smax;
    }
    bound = std::max(bound, b);
  }
  if (dc + region.radius > r) {
    const double smin = std::max(dc - region.radius, r);
    double b = std::abs(ch.clog) / smin, sp = smin * smin;
    for (size_t i = 0; i < ch.cout.size(); ++i) {
      b += (static_cast<double>(i + 1)) * std::abs(ch.cout[i]) / sp;
      sp *= smin;
    }
    bound = std::max(bound, b);
  }
  return bound;
}

}  // namespace

double HarmonicField::grad_sup_bound(const Disk& region) const {
  if (!node_) return 0.0;
  return std::visit(
      Overloaded{
          [&](const AffineNode& n) { return n.a.norm(); },
          [&](const PolyNode& n) {
            const double d = (region.center - n.center).norm();
            const double c = std::abs(n.coef);
            if (n.n > 0) {
              const double smax = d + region.radius;
              return n.n * c * std::pow(smax, n.n - 1);
            }
            const double smin = d - region.radius;
            if (smin <= 0.0)
              throw NumericalError("grad_sup_bound: region touches a multipole center");
            return -n.n * c * std::pow(smin, n.n - 1);
          },
          [&](const SumNode& n) {
            double s = 0.0;
            for (const auto& t : n.terms) s += t.grad_sup_bound(region);
            return s;
          },
          [&](const ScaleNode& n) { return std::abs(n.s) * n.base.grad_sup_bound(region); },
          [&](const PullbackNode&) -> double {
            throw NumericalError("grad_sup_bound: pullback nodes are not supported");
          },
          [&](const LayerNode& n) { return layer_grad_sup(n.ch, region); },
      },
      node_->v);
}

namespace {

void collect_singular(const HarmonicField& f, std::vector<Vec2>& out);

struct SingularVisitor {
  std::vector<Vec2>& out;
  void operator()(const AffineNode&) const {}
  void operator()(const PolyNode& n) const {
    if (n.n < 0) out.push_back(n.center);
  }
  void operator()(const SumNode& n) const {
    for (const auto& t : n.terms) collect_singular(t, out);
  }
  void operator()(const ScaleNode& n) const { collect_singular(n.base, out); }
  void operator()(const PullbackNode& n) const {
    out.push_back(n.disk.center);
    std::vector<Vec2> base_pts;
    collect_singular(n.base, base_pts);
    for (const Vec2& s : base_pts) {
      // A base singularity at the reflection center maps to infinity.
      if ((s - n.disk.center).norm() > 1e-14 * n.disk.radius) out.push_back(reflect(n.disk, s));
    }
  }
  void operator()(const LayerNode&) const {}
};

void collect_singular(const HarmonicField& f, std::vector<Vec2>& out) {
  if (f.node() == nullptr) return;
  std::visit(SingularVisitor{out}, f.node()->v);
}

}  // namespace

std::vector<Vec2> HarmonicField::singular_points() const {
  std::vector<Vec2> out;
  collect_singular(*this, out);
  return out;
}

HarmonicField harmonic_conjugate(const HarmonicField& f) {
  if (f.empty()) return f;
  return std::visit(
      Overloaded{
          [&](const AffineNode& n) { return HarmonicField::affine(rot90(n.a), 0.0); },
          [&](const PolyNode& n) {
            return HarmonicField::poly(n.center, n.n, Cplx(0.0, -1.0) * n.coef);
          },
          [&](const SumNode& n) {
            std::vector<HarmonicField> terms;
            terms.reserve(n.terms.size());
            for (const auto& t : n.terms) terms.push_back(harmonic_conjugate(t));
            return HarmonicField::sum(std::move(terms));
          },
          [&](const ScaleNode& n) {
            return HarmonicField::scale(n.s, harmonic_conjugate(n.base));
          },
          [&](const PullbackNode& n) {
            // Reflections are orientation reversing, so conjugation picks up
            // a sign: conj(f o R) = -conj(f) o R.
            return HarmonicField::scale(-1.0, HarmonicField::pullback(harmonic_conjugate(n.base), n.disk));
          },
          [&](const LayerNode& n) { return HarmonicField::layer(n.ch.conjugate()); },
      },
      f.node()->v);
}

}  // namespace gapfield
