#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace geomatch {

enum class SpatialFamily { gaussian, cauchy };
enum class SphericalFamily { linear, sphere_gaussian };

/// Radial profile rho(|x - x'|^2) of the varifold kernel.
struct SpatialProfile {
  SpatialFamily family = SpatialFamily::gaussian;
  double sigma = 1.0;

  SpatialProfile() = default;
  SpatialProfile(SpatialFamily family, double sigma);

  double rho(double r2) const;
  /// Derivative with respect to r2.
  double d_rho(double r2) const;
};

/// Profile gamma(<t, t'>) acting on cosines between unit orientation vectors.
///
/// The spherical Gaussian is the restriction exp(-|t - t'|^2 / sigma^2) =
/// exp((2 / sigma^2)(c - 1)).
struct SphericalProfile {
  SphericalFamily family = SphericalFamily::linear;
  double sigma = 1.0;

  SphericalProfile() = default;
  SphericalProfile(SphericalFamily family, double sigma);

  double gamma(double c) const;
  double d_gamma(double c) const;
};

/// Scalar Gaussian times identity, K(x, y) = exp(-|x - y|^2 / sigma^2) Id.
struct DeformationKernel {
  double sigma = 1.0;

  DeformationKernel() = default;
  explicit DeformationKernel(double sigma);

  double scalar(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// d/dx of the scalar factor.
  Eigen::VectorXd scalar_grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  Eigen::MatrixXd eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  /// Entry c holds dK/dx_c, a d x d matrix.
  std::vector<Eigen::MatrixXd> grad_x(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
};

SpatialFamily parse_spatial_family(const std::string& name);
SphericalFamily parse_spherical_family(const std::string& name);
std::string to_string(SpatialFamily family);
std::string to_string(SphericalFamily family);

}  // namespace geomatch
