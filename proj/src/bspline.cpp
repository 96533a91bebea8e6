#include "geomatch/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geomatch/error.hpp"

namespace geomatch {

BSplineBasis::BSplineBasis(int num_ctrl, int degree, double lo, double hi, bool periodic,
                           std::vector<double> knots)
    : num_ctrl_(num_ctrl),
      degree_(degree),
      lo_(lo),
      hi_(hi),
      periodic_(periodic),
      knots_(std::move(knots)) {}

BSplineBasis BSplineBasis::clamped(int num_ctrl, int degree, double lo, double hi) {
  if (degree < 1) throw Error("spline degree must be >= 1");
  if (num_ctrl < degree + 1) throw Error("clamped spline needs at least degree + 1 control points");
  const int spans = num_ctrl - degree;
  std::vector<double> knots;
  knots.reserve(num_ctrl + degree + 1);
  for (int k = 0; k < degree; ++k) knots.push_back(lo);
  for (int k = 0; k <= spans; ++k) knots.push_back(lo + (hi - lo) * k / spans);
  for (int k = 0; k < degree; ++k) knots.push_back(hi);
  return BSplineBasis(num_ctrl, degree, lo, hi, false, std::move(knots));
}

BSplineBasis BSplineBasis::periodic(int num_ctrl, int degree, double lo, double hi) {
  if (degree < 1) throw Error("spline degree must be >= 1");
  if (num_ctrl < degree + 1) throw Error("periodic spline needs more control points than its degree");
  const double h = (hi - lo) / num_ctrl;
  std::vector<double> knots(num_ctrl + 2 * degree + 1);
  for (int k = 0; k < static_cast<int>(knots.size()); ++k) knots[k] = lo + (k - degree) * h;
  return BSplineBasis(num_ctrl, degree, lo, hi, true, std::move(knots));
}

std::vector<double> BSplineBasis::breakpoints() const {
  std::vector<double> out;
  for (double k : knots_) {
    if (k < lo_ - 1e-15 || k > hi_ + 1e-15) continue;
    if (out.empty() || k > out.back() + 1e-15) out.push_back(k);
  }
  return out;
}

int BSplineBasis::find_span(double u) const {
  // Basis functions run over knot spans [degree, last].
  const int last = static_cast<int>(knots_.size()) - degree_ - 2;
  if (u >= knots_[last + 1]) {
    int s = last;
    while (s > degree_ && knots_[s] >= knots_[s + 1]) --s;
    return s;
  }
  if (u <= knots_[degree_]) return degree_;
  const auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + last + 2, u);
  return static_cast<int>(it - knots_.begin()) - 1;
}

BSplineBasis::Eval BSplineBasis::evaluate(double u, int num_derivs) const {
  const int p = degree_;
  const int span = find_span(u);
  const int nd = std::min(num_derivs, p);
  const auto& U = knots_;

  // Triangular table of basis values and knot differences.
  Eigen::MatrixXd ndu(p + 1, p + 1);
  std::vector<double> left(p + 1), right(p + 1);
  ndu(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - U[span + 1 - j];
    right[j] = U[span + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu(j, r) = right[r + 1] + left[j - r];
      const double temp = ndu(r, j - 1) / ndu(j, r);
      ndu(r, j) = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu(j, j) = saved;
  }

  Eval out;
  out.first = span - p;
  out.values = Eigen::MatrixXd::Zero(num_derivs + 1, p + 1);
  for (int j = 0; j <= p; ++j) out.values(0, j) = ndu(j, p);

  Eigen::MatrixXd a(2, p + 1);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a(0, 0) = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a(s2, 0) = a(s1, 0) / ndu(pk + 1, rk);
        d = a(s2, 0) * ndu(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a(s2, j) = (a(s1, j) - a(s1, j - 1)) / ndu(pk + 1, rk + j);
        d += a(s2, j) * ndu(rk + j, pk);
      }
      if (r <= pk) {
        a(s2, k) = -a(s1, k - 1) / ndu(pk + 1, r);
        d += a(s2, k) * ndu(r, pk);
      }
      out.values(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= nd; ++k) {
    out.values.row(k) *= factor;
    factor *= (p - k);
  }
  return out;
}

Eigen::RowVectorXd BSplineBasis::dense_row(double u, int deriv) const {
  const Eval e = evaluate(u, deriv);
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(num_ctrl_);
  for (int k = 0; k <= degree_; ++k) row(ctrl_index(e.first + k)) += e.values(deriv, k);
  return row;
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw Error("quadrature needs at least one node");
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[n - 1 - i] = x;
    weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

}  // namespace geomatch
