#pragma once

#include <Eigen/Dense>
#include <vector>

#include "geomatch/bspline.hpp"
#include "geomatch/match.hpp"
#include "geomatch/shapes.hpp"

namespace geomatch {

/// Path of planar curves c(t, theta) = sum_ij ctrl_ij B_i(t) C_j(theta).
///
/// B_i are clamped in t on [0, 1], so c(0, .) and c(1, .) depend only on the
/// first and last control rows. C_j live on [0, 2 pi], periodic for closed curves.
class SplinePath {
 public:
  SplinePath(int num_t, int num_theta, int degree_t, int degree_theta, bool closed);

  int num_t() const { return basis_t_.num_ctrl(); }
  int num_theta() const { return basis_theta_.num_ctrl(); }
  bool closed() const { return closed_; }
  const BSplineBasis& basis_t() const { return basis_t_; }
  const BSplineBasis& basis_theta() const { return basis_theta_; }

  /// (num_t * num_theta) x 2, row i * num_theta + j holds c_ij.
  Eigen::MatrixXd& ctrl() { return ctrl_; }
  const Eigen::MatrixXd& ctrl() const { return ctrl_; }

  void set_row(int i, const Eigen::MatrixXd& row_ctrl);
  Eigen::MatrixXd row(int i) const;

  /// d^dt/dt^dt d^dtheta/dtheta^dtheta c(t, theta).
  Eigen::Vector2d eval(double t, double theta, int dt = 0, int dtheta = 0) const;

  /// Uniform parameters at which curves are sampled for output and fidelity.
  std::vector<double> sample_params(int count) const;
  /// Polyline c(t, theta_k) at sample_params(count).
  SimplicialShape sample(double t, int count) const;

 private:
  BSplineBasis basis_t_;
  BSplineBasis basis_theta_;
  bool closed_;
  Eigen::MatrixXd ctrl_;
};

/// Gauss-Legendre points per knot interval in t and theta.
struct QuadratureRule {
  int points_t = 3;
  int points_theta = 5;
};

/// Discrete Riemannian energy of the path,
///   sum_nodes w [a0 |c_t|^2 + a1 |D_s c_t|^2 + a2 |D_s^2 c_t|^2] |c_theta|,
/// with D_s = |c_theta|^{-1} d/dtheta. When `grad` is given it receives the
/// derivative with respect to every control point (same layout as ctrl()).
/// Throws NotImmersed where |c_theta| <= 1e-12.
double path_energy(const SplinePath& path, const SobolevCoeffs& coeffs, const QuadratureRule& quad,
                   Eigen::MatrixXd* grad = nullptr);

/// Vertices of a single open or closed polyline in traversal order.
Points ordered_polyline(const SimplicialShape& curve);

struct SplineFit {
  Eigen::MatrixXd ctrl;  // num_theta x 2
  /// RMS residual divided by the bounding-box diagonal of the curve.
  double relative_residual = 0.0;
};

/// Least-squares fit of a spline curve to a polyline, chord-length parametrized.
/// The polyline is densified when it has fewer than 2 * num_theta vertices.
SplineFit fit_spline_curve(const SimplicialShape& curve, const BSplineBasis& basis);

MatchReport match_intrinsic(const SimplicialShape& source, const SimplicialShape& target,
                            const MatchConfig& cfg);

}  // namespace geomatch
