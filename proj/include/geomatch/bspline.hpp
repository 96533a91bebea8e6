#pragma once

#include <Eigen/Dense>
#include <vector>

namespace geomatch {

/// B-spline basis on uniform simple knots over [lo, hi], either clamped (full
/// multiplicity at both ends) or periodic.
class BSplineBasis {
 public:
  static BSplineBasis clamped(int num_ctrl, int degree, double lo, double hi);
  static BSplineBasis periodic(int num_ctrl, int degree, double lo, double hi);

  int degree() const { return degree_; }
  int num_ctrl() const { return num_ctrl_; }
  bool is_periodic() const { return periodic_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

  /// Distinct knots inside [lo, hi]; consecutive pairs delimit polynomial pieces.
  std::vector<double> breakpoints() const;

  struct Eval {
    /// Unwrapped index of the first of the degree+1 nonzero functions.
    int first = 0;
    /// Row k holds the k-th derivatives of the nonzero functions.
    Eigen::MatrixXd values;
  };

  /// Values and derivatives up to `num_derivs` at u in [lo, hi] (Cox-de Boor).
  Eval evaluate(double u, int num_derivs) const;

  /// Control-point index of the k-th unwrapped basis function.
  int ctrl_index(int k) const { return periodic_ ? k % num_ctrl_ : k; }

  /// Dense row of all num_ctrl() basis values (derivative order `deriv`) at u.
  Eigen::RowVectorXd dense_row(double u, int deriv = 0) const;

 private:
  BSplineBasis(int num_ctrl, int degree, double lo, double hi, bool periodic,
               std::vector<double> knots);

  int find_span(double u) const;

  int num_ctrl_;
  int degree_;
  double lo_;
  double hi_;
  bool periodic_;
  std::vector<double> knots_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace geomatch
