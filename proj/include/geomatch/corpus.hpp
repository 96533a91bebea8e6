#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geomatch/shapes.hpp"

/// Analytic test shapes used by the fixtures, the self-test and the test suites.
namespace geomatch::corpus {

/// Closed counter-clockwise curves sampled at `n` uniform parameter values.
SimplicialShape circle(int n, double radius = 1.0, double cx = 0.0, double cy = 0.0);
SimplicialShape ellipse(int n, double a = 1.5, double b = 0.7);
/// Ellipse whose vertical extent pinches near x = 0.
SimplicialShape necked_ellipse(int n, double a = 1.5, double b = 1.0, double neck = 0.35);
/// Axis-aligned square of side `side`, with `n` (multiple of 4) vertices.
SimplicialShape square(int n, double side = 2.0);
SimplicialShape star(int n, int branches = 5, double inner = 0.55, double outer = 1.1);
SimplicialShape limacon(int n, double a = 0.6, double b = 0.9);

/// Icosahedron refined `level` times and projected to the sphere; outward normals.
SimplicialShape icosphere(int level, double radius = 1.0, double cx = 0.0, double cy = 0.0,
                          double cz = 0.0);
/// Torus sector phi in [0, sweep] with tube radius `r`; an incomplete ring.
SimplicialShape torus_patch(int n_major, int n_minor, double major = 1.0, double minor = 0.35,
                            double sweep = 4.71238898038469);

std::vector<std::pair<std::string, SimplicialShape>> curve_corpus();
std::vector<std::pair<std::string, SimplicialShape>> surface_corpus();

}  // namespace geomatch::corpus
