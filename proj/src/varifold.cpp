#include "geomatch/varifold.hpp"

#include <algorithm>
#include <vector>

#include "geomatch/error.hpp"
#include "geomatch/parallel.hpp"

namespace geomatch {

namespace {

void check_compatible(const SimplicialShape& a, const SimplicialShape& b) {
  if (a.dim() != b.dim()) {
    throw DimensionMismatch("shapes live in R^" + std::to_string(a.dim()) + " and R^" +
                            std::to_string(b.dim()));
  }
  if (a.kind() != b.kind()) throw KindMismatch("cannot compare a curve with a surface");
}

double feature_inner(const CellFeatures& a, const CellFeatures& b, const VarifoldKernel& k) {
  const int na = static_cast<int>(a.measures.size());
  const int nb = static_cast<int>(b.measures.size());
  std::vector<double> rows(na, 0.0);
  parallel_for(na, [&](int i) {
    double acc = 0.0;
    for (int j = 0; j < nb; ++j) {
      const double r2 = (a.barycenters.row(i) - b.barycenters.row(j)).squaredNorm();
      const double c = a.orientations.row(i).dot(b.orientations.row(j));
      acc += k.spatial.rho(r2) * k.spherical.gamma(c) * b.measures(j);
    }
    rows[i] = acc * a.measures(i);
  });
  double total = 0.0;
  for (double r : rows) total += r;
  return total;
}

// Adds scale * d<a, b>/d(features of a) into the per-cell accumulators.
void accumulate_feature_grad(const CellFeatures& a, const CellFeatures& b, const VarifoldKernel& k,
                             double scale, Points& g_bary, Points& g_orient,
                             Eigen::VectorXd& g_measure) {
  const int na = static_cast<int>(a.measures.size());
  const int nb = static_cast<int>(b.measures.size());
  const int d = static_cast<int>(a.barycenters.cols());
  parallel_for(na, [&](int i) {
    Eigen::RowVectorXd gx = Eigen::RowVectorXd::Zero(d);
    Eigen::RowVectorXd gt = Eigen::RowVectorXd::Zero(d);
    double gv = 0.0;
    const double vi = a.measures(i);
    for (int j = 0; j < nb; ++j) {
      const Eigen::RowVectorXd diff = a.barycenters.row(i) - b.barycenters.row(j);
      const double r2 = diff.squaredNorm();
      const double c = a.orientations.row(i).dot(b.orientations.row(j));
      const double rho = k.spatial.rho(r2);
      const double gam = k.spherical.gamma(c);
      const double wj = b.measures(j);
      gx += (2.0 * k.spatial.d_rho(r2) * gam * vi * wj) * diff;
      gt += (rho * k.spherical.d_gamma(c) * vi * wj) * b.orientations.row(j);
      gv += rho * gam * wj;
    }
    g_bary.row(i) += scale * gx;
    g_orient.row(i) += scale * gt;
    g_measure(i) += scale * gv;
  });
}

// Chain rule from per-cell feature gradients to vertex positions.
Points pull_back_to_vertices(const SimplicialShape& shape, const CellFeatures& f,
                             const Points& g_bary, const Points& g_orient,
                             const Eigen::VectorXd& g_measure) {
  const Points& v = shape.vertices();
  const Cells& s = shape.simplices();
  const int d = shape.dim();
  Points grad = Points::Zero(shape.num_vertices(), d);
  for (int i = 0; i < shape.num_simplices(); ++i) {
    const Eigen::RowVectorXd t = f.orientations.row(i);
    const Eigen::RowVectorXd gt = g_orient.row(i);
    const Eigen::RowVectorXd gt_perp = gt - gt.dot(t) * t;
    if (s.cols() == 2) {
      const double len = f.measures(i);
      const Eigen::RowVectorXd ge = g_measure(i) * t + gt_perp / len;
      const Eigen::RowVectorXd gb = 0.5 * g_bary.row(i);
      grad.row(s(i, 0)) += gb - ge;
      grad.row(s(i, 1)) += gb + ge;
    } else {
      const double nn = 2.0 * f.measures(i);
      const Eigen::Vector3d gn = (0.5 * g_measure(i) * t + gt_perp / nn).transpose();
      const Eigen::Vector3d e1 = (v.row(s(i, 1)) - v.row(s(i, 0))).transpose();
      const Eigen::Vector3d e2 = (v.row(s(i, 2)) - v.row(s(i, 0))).transpose();
      const Eigen::Vector3d g1 = e2.cross(gn);
      const Eigen::Vector3d g2 = gn.cross(e1);
      const Eigen::RowVectorXd gb = g_bary.row(i) / 3.0;
      grad.row(s(i, 0)) += gb - (g1 + g2).transpose();
      grad.row(s(i, 1)) += gb + g1.transpose();
      grad.row(s(i, 2)) += gb + g2.transpose();
    }
  }
  return grad;
}

}  // namespace

double varifold_inner(const SimplicialShape& s1, const SimplicialShape& s2,
                      const VarifoldKernel& kernel) {
  check_compatible(s1, s2);
  return feature_inner(cell_features(s1), cell_features(s2), kernel);
}

double varifold_dist_sq(const SimplicialShape& s1, const SimplicialShape& s2,
                        const VarifoldKernel& kernel) {
  check_compatible(s1, s2);
  const CellFeatures f1 = cell_features(s1);
  const CellFeatures f2 = cell_features(s2);
  const double d2 = feature_inner(f1, f1, kernel) - 2.0 * feature_inner(f1, f2, kernel) +
                    feature_inner(f2, f2, kernel);
  return std::max(d2, 0.0);
}

Points varifold_grad(const SimplicialShape& s1, const SimplicialShape& s2,
                     const VarifoldKernel& kernel) {
  Points grad;
  VarifoldFidelity(s2, kernel).value_grad(s1, grad);
  return grad;
}

VarifoldFidelity::VarifoldFidelity(const SimplicialShape& target, VarifoldKernel kernel)
    : target_(target),
      kernel_(kernel),
      target_features_(cell_features(target)),
      target_self_(feature_inner(target_features_, target_features_, kernel_)) {}

double VarifoldFidelity::value(const SimplicialShape& shape) const {
  check_compatible(shape, target_);
  const CellFeatures f = cell_features(shape);
  const double d2 = feature_inner(f, f, kernel_) - 2.0 * feature_inner(f, target_features_, kernel_) +
                    target_self_;
  return std::max(d2, 0.0);
}

double VarifoldFidelity::value_grad(const SimplicialShape& shape, Points& grad) const {
  check_compatible(shape, target_);
  const CellFeatures f = cell_features(shape);
  const int ns = shape.num_simplices();
  const int d = shape.dim();
  Points g_bary = Points::Zero(ns, d);
  Points g_orient = Points::Zero(ns, d);
  Eigen::VectorXd g_measure = Eigen::VectorXd::Zero(ns);
  accumulate_feature_grad(f, f, kernel_, 2.0, g_bary, g_orient, g_measure);
  accumulate_feature_grad(f, target_features_, kernel_, -2.0, g_bary, g_orient, g_measure);
  grad = pull_back_to_vertices(shape, f, g_bary, g_orient, g_measure);
  const double d2 = feature_inner(f, f, kernel_) - 2.0 * feature_inner(f, target_features_, kernel_) +
                    target_self_;
  return std::max(d2, 0.0);
}

}  // namespace geomatch
