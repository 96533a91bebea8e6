#include "geomatch/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "geomatch/error.hpp"

namespace geomatch {

SpatialProfile::SpatialProfile(SpatialFamily family_, double sigma_)
    : family(family_), sigma(sigma_) {
  if (!(sigma > 0.0)) throw Error("spatial kernel sigma must be positive");
}

double SpatialProfile::rho(double r2) const {
  const double u = r2 / (sigma * sigma);
  return family == SpatialFamily::gaussian ? std::exp(-u) : 1.0 / (1.0 + u);
}

double SpatialProfile::d_rho(double r2) const {
  const double s2 = sigma * sigma;
  const double u = r2 / s2;
  if (family == SpatialFamily::gaussian) return -std::exp(-u) / s2;
  const double q = 1.0 + u;
  return -1.0 / (s2 * q * q);
}

SphericalProfile::SphericalProfile(SphericalFamily family_, double sigma_)
    : family(family_), sigma(sigma_) {
  if (!(sigma > 0.0)) throw Error("spherical kernel sigma must be positive");
}

double SphericalProfile::gamma(double c) const {
  c = std::clamp(c, -1.0, 1.0);
  if (family == SphericalFamily::linear) return c;
  return std::exp(2.0 / (sigma * sigma) * (c - 1.0));
}

double SphericalProfile::d_gamma(double c) const {
  c = std::clamp(c, -1.0, 1.0);
  if (family == SphericalFamily::linear) return 1.0;
  const double k = 2.0 / (sigma * sigma);
  return k * std::exp(k * (c - 1.0));
}

DeformationKernel::DeformationKernel(double sigma_) : sigma(sigma_) {
  if (!(sigma > 0.0)) throw Error("deformation kernel sigma must be positive");
}

double DeformationKernel::scalar(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return std::exp(-(x - y).squaredNorm() / (sigma * sigma));
}

Eigen::VectorXd DeformationKernel::scalar_grad_x(const Eigen::VectorXd& x,
                                                 const Eigen::VectorXd& y) const {
  return (-2.0 / (sigma * sigma) * scalar(x, y)) * (x - y);
}

Eigen::MatrixXd DeformationKernel::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const auto d = x.size();
  return scalar(x, y) * Eigen::MatrixXd::Identity(d, d);
}

std::vector<Eigen::MatrixXd> DeformationKernel::grad_x(const Eigen::VectorXd& x,
                                                       const Eigen::VectorXd& y) const {
  const auto d = x.size();
  const Eigen::VectorXd g = scalar_grad_x(x, y);
  std::vector<Eigen::MatrixXd> out;
  out.reserve(d);
  for (Eigen::Index c = 0; c < d; ++c) out.push_back(g(c) * Eigen::MatrixXd::Identity(d, d));
  return out;
}

SpatialFamily parse_spatial_family(const std::string& name) {
  if (name == "gaussian") return SpatialFamily::gaussian;
  if (name == "cauchy") return SpatialFamily::cauchy;
  throw Error("unknown spatial kernel '" + name + "' (expected gaussian|cauchy)");
}

SphericalFamily parse_spherical_family(const std::string& name) {
  if (name == "linear") return SphericalFamily::linear;
  if (name == "sphere_gaussian") return SphericalFamily::sphere_gaussian;
  throw Error("unknown spherical kernel '" + name + "' (expected linear|sphere_gaussian)");
}

std::string to_string(SpatialFamily family) {
  return family == SpatialFamily::gaussian ? "gaussian" : "cauchy";
}

std::string to_string(SphericalFamily family) {
  return family == SphericalFamily::linear ? "linear" : "sphere_gaussian";
}

}  // namespace geomatch
