// Regenerates the shape fixtures under data/ (run once; outputs are committed).
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numbers>

#include "geomatch/corpus.hpp"
#include "geomatch/intrinsic.hpp"
#include "geomatch/shapes.hpp"

namespace gm = geomatch;
namespace fs = std::filesystem;

namespace {

// Closed spline curve whose control polygon is a regular polygon, sampled at the
// intrinsic model's default evaluation points. Its chord-length fit is exact.
gm::SimplicialShape spline_circle(double radius) {
  gm::SplinePath path(2, 40, 1, 4, true);
  Eigen::MatrixXd ctrl(40, 2);
  for (int j = 0; j < 40; ++j) {
    const double th = 2.0 * std::numbers::pi * (j + 0.5) / 40;
    ctrl.row(j) << radius * std::cos(th), radius * std::sin(th);
  }
  path.set_row(0, ctrl);
  path.set_row(1, ctrl);
  return path.sample(0.0, 80);
}

gm::SimplicialShape segment(double y) {
  gm::Points p(2, 2);
  p << 0.0, y, 1.0, y;
  return gm::make_polyline(p, false);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data");
  fs::create_directories(root / "corpus");
  for (const auto& [name, shape] : gm::corpus::curve_corpus()) gm::save_shape(shape, root / "corpus" / (name + ".curve"));
  for (const auto& [name, shape] : gm::corpus::surface_corpus()) gm::save_shape(shape, root / "corpus" / (name + ".obj"));

  gm::save_shape(segment(0.0), root / "seg_a.curve");
  gm::save_shape(segment(1.0), root / "seg_b.curve");
  gm::save_shape(gm::corpus::circle(32), root / "circle.curve");
  gm::save_shape(gm::corpus::ellipse(32), root / "ellipse.curve");
  gm::save_shape(gm::corpus::necked_ellipse(32), root / "necked_ellipse.curve");
  gm::save_shape(gm::corpus::circle(32, 1.0, 1.0, 0.0), root / "circle_shifted.curve");
  gm::save_shape(spline_circle(1.0), root / "spline_circle.curve");
  gm::save_shape(gm::corpus::icosphere(1), root / "sphere.obj");
  gm::save_shape(gm::corpus::icosphere(1, 0.8, 0.3, 0.1, 0.0), root / "sphere_shifted.obj");
  std::cout << "fixtures written to " << root << "\n";
  return 0;
}
