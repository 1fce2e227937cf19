#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "gapfield/fields.hpp"
#include "gapfield/geometry.hpp"

namespace gapfield {

// Uniform periodic grid on a circle; trapezoid quadrature on it is spectrally
// accurate for smooth integrands. The node count must be a power of two (for
// clean up/downsampling), at least 16.
struct BoundaryGrid {
  Disk disk;
  int m = 256;

  BoundaryGrid(const Disk& d, int m_nodes);

  double theta(int j) const { return 2.0 * kPi * j / m; }
  Vec2 node(int j) const { return disk.point_at(theta(j)); }
  Vec2 normal(int j) const { return (node(j) - disk.center) / disk.radius; }
  // Arclength weight of one node.
  double arc_weight() const { return 2.0 * kPi * disk.radius / m; }
};

Eigen::VectorXd grid_sample(const BoundaryGrid& g, const std::function<double(double)>& f);

// Mean with respect to arclength, (1/|bd D|) integral.
double grid_mean(const BoundaryGrid& g, const Eigen::VectorXd& v);

// Trigonometric interpolant coefficients of grid values (Nyquist mode kept as
// a pure cosine). Exact for band-limited data.
FourierCoeffs to_fourier(const BoundaryGrid& g, const Eigen::VectorXd& v);
Eigen::VectorXd from_fourier(const BoundaryGrid& g, const FourierCoeffs& c);

// Spectral zero-pad resampling onto `factor` times as many nodes.
std::pair<BoundaryGrid, Eigen::VectorXd> upsample(const BoundaryGrid& g, const Eigen::VectorXd& v,
                                                  int factor);

// d/ds along the circle (arclength), computed spectrally.
Eigen::VectorXd tangential_derivative(const BoundaryGrid& g, const Eigen::VectorXd& v);
// Inverse of the above on mean-zero data, normalized to zero mean.
Eigen::VectorXd tangential_antiderivative(const BoundaryGrid& g, const Eigen::VectorXd& v);

// K* on a circle maps every density to a constant, half the density mean.
double kstar_apply_mean(const BoundaryGrid& g, const Eigen::VectorXd& density);

// Closed-form counterparts of the layer potentials of the trigonometric
// interpolant of the grid data; exact up to aliasing.
CircleHarmonics single_layer_harmonics(const BoundaryGrid& g, const Eigen::VectorXd& density);
CircleHarmonics double_layer_harmonics(const BoundaryGrid& g, const Eigen::VectorXd& data);

// Point evaluation of the layer potentials. Away from the circle: trapezoid
// quadrature, upsampled so the node spacing stays below dist/5 (power-of-two
// factor, capped at 64). Closer than the cap allows: the Fourier route above.
// On the circle itself the inside-branch limit is returned.
double single_layer_eval(const BoundaryGrid& g, const Eigen::VectorXd& density, const Vec2& x);
Vec2 single_layer_grad(const BoundaryGrid& g, const Eigen::VectorXd& density, const Vec2& x);
double double_layer_eval(const BoundaryGrid& g, const Eigen::VectorXd& data, const Vec2& x);
Vec2 double_layer_grad(const BoundaryGrid& g, const Eigen::VectorXd& data, const Vec2& x);

// Values of the single layer at the grid nodes (Fourier multiplier
// -r/(2|n|) per mode, r ln r on the mean).
Eigen::VectorXd single_layer_on_surface(const BoundaryGrid& g, const Eigen::VectorXd& density);

}  // namespace gapfield
