#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>

#include "geomatch/shapes.hpp"

namespace testing {

inline const std::string kData = GEOMATCH_DATA_DIR;

inline Eigen::VectorXd flat(const geomatch::Points& p) { return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()); }

inline geomatch::Points unflat(const Eigen::VectorXd& v, int d) {
  return Eigen::Map<const geomatch::Points>(v.data(), v.size() / d, d);
}

inline geomatch::Points jitter(geomatch::Points p, std::mt19937_64& rng, double s) {
  std::normal_distribution<double> n(0.0, s);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] += n(rng);
  return p;
}

inline Eigen::MatrixXd random_rotation(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(d, d);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

inline geomatch::SimplicialShape segment(double x0, double y0, double x1, double y1) {
  geomatch::Points p(2, 2);
  p << x0, y0, x1, y1;
  return geomatch::make_polyline(p, false);
}

// Scratch directory under the build tree, emptied on creation.
std::string scratch_dir(const std::string& name);

}  // namespace testing
