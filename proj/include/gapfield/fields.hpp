#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "gapfield/geometry.hpp"

namespace gapfield {

using Cplx = std::complex<double>;

// Boundary data / density on a circle in trigonometric form:
// f(theta) = a0 + sum_n (ac[n-1] cos(n theta) + as[n-1] sin(n theta)).
struct FourierCoeffs {
  double a0 = 0.0;
  std::vector<double> ac, as;

  int modes() const { return static_cast<int>(std::max(ac.size(), as.size())); }
  double cosc(int n) const { return n >= 1 && n <= static_cast<int>(ac.size()) ? ac[n - 1] : 0.0; }
  double sinc(int n) const { return n >= 1 && n <= static_cast<int>(as.size()) ? as[n - 1] : 0.0; }
};

// A harmonic function given by separate mode sums inside and outside a circle,
// with zeta = X - center:
//   inside:  cin0 + Re(sum_{n>=1} cin[n-1] zeta^n)
//   outside: cout0 + clog ln|zeta| + Re(sum_{n>=1} cout[n-1] zeta^-n)
// Layer potentials of circle densities and their harmonic conjugates all take
// this shape. On the circle itself the inside-limit branch is used.
struct CircleHarmonics {
  Disk disk;
  double cin0 = 0.0, cout0 = 0.0, clog = 0.0;
  std::vector<Cplx> cin, cout;

  double eval_inside(const Vec2& x) const;
  double eval_outside(const Vec2& x) const;
  Vec2 grad_inside(const Vec2& x) const;
  Vec2 grad_outside(const Vec2& x) const;

  bool snaps_inside(const Vec2& x) const {
    return (x - disk.center).norm() <= disk.radius * (1.0 + 1e-13);
  }
  double eval(const Vec2& x) const { return snaps_inside(x) ? eval_inside(x) : eval_outside(x); }
  Vec2 grad(const Vec2& x) const { return snaps_inside(x) ? grad_inside(x) : grad_outside(x); }

  // Rotates every mode a quarter turn: grad(conj) = rot90(grad). Fails when
  // the field carries net charge (clog != 0), whose conjugate is multivalued.
  CircleHarmonics conjugate() const;
};

// S_D[density](X) closed form, exact for trigonometric densities.
CircleHarmonics single_layer_closed_form(const Disk& d, const FourierCoeffs& density);
// D_D[data](X) closed form. Interior limit (1/2 + K) data, exterior (-1/2 + K).
CircleHarmonics double_layer_closed_form(const Disk& d, const FourierCoeffs& data);
// The harmonic extension of the boundary data into the disk (zero outside).
CircleHarmonics interior_extension_closed_form(const Disk& d, const FourierCoeffs& data);

struct Node;

// Immutable shared expression tree of harmonic functions. Reflections
// (pullbacks) preserve harmonicity away from a finite singular set.
class HarmonicField {
 public:
  HarmonicField() = default;

  double eval(const Vec2& x) const;
  Vec2 grad(const Vec2& x) const;

  // Sup of |grad| over the closed disk `region`, for fields built from
  // entire/mode pieces (no pullbacks). Used to certify series tails.
  double grad_sup_bound(const Disk& region) const;

  // Isolated points where evaluation is undefined (reflected center chains,
  // multipole centers).
  std::vector<Vec2> singular_points() const;

  bool empty() const { return node_ == nullptr; }

  static HarmonicField affine(const Vec2& a, double c = 0.0);
  // Re(coef * (X - center)^n) as a complex power; n < 0 gives the decaying
  // multipole, singular at the center.
  static HarmonicField poly(const Vec2& center, int n, Cplx coef);
  static HarmonicField sum(std::vector<HarmonicField> terms);
  static HarmonicField scale(double s, HarmonicField base);
  // pullback(f, d)(X) = f(R_d(X))
  static HarmonicField pullback(HarmonicField base, const Disk& d);
  static HarmonicField layer(CircleHarmonics ch);

  const Node* node() const { return node_.get(); }

 private:
  explicit HarmonicField(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
  friend HarmonicField harmonic_conjugate(const HarmonicField& f);
};

// The harmonic conjugate: grad(conj f) = rot90(grad f), i.e. f + i conj(f) is
// holomorphic. Computed structurally; additive constants are set to zero.
// Pullbacks conjugate with a sign flip (reflections reverse orientation), and
// conjugating twice returns the negated field.
HarmonicField harmonic_conjugate(const HarmonicField& f);

}  // namespace gapfield
