#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>

namespace geomatch {

/// Central finite-difference gradient of f at x, step h per coordinate.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double fp = f(y);
    y(i) = x(i) - h;
    const double fm = f(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// ||g - g_fd|| / max(||g_fd||, floor).
inline double relative_error(const Eigen::VectorXd& g, const Eigen::VectorXd& g_fd, double floor = 1e-8) {
  return (g - g_fd).norm() / std::max(g_fd.norm(), floor);
}

}  // namespace geomatch
