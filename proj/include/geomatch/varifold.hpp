#pragma once

#include "geomatch/kernels.hpp"
#include "geomatch/shapes.hpp"

namespace geomatch {

/// Separable kernel K_W((x,t),(x',t')) = rho(|x - x'|^2) gamma(<t, t'>).
struct VarifoldKernel {
  SpatialProfile spatial;
  SphericalProfile spherical;
};

/// Barycenter-rule inner product of the oriented varifolds of two shapes.
double varifold_inner(const SimplicialShape& s1, const SimplicialShape& s2,
                      const VarifoldKernel& kernel);

/// Squared chordal distance <m1,m1> - 2<m1,m2> + <m2,m2>, clamped at 0.
double varifold_dist_sq(const SimplicialShape& s1, const SimplicialShape& s2,
                        const VarifoldKernel& kernel);

/// Gradient of varifold_dist_sq with respect to the vertices of s1 (N_V x d).
Points varifold_grad(const SimplicialShape& s1, const SimplicialShape& s2,
                     const VarifoldKernel& kernel);

/// Squared distance to a fixed target, caching the target's features and
/// self inner product. This is the endpoint penalty of every matcher.
class VarifoldFidelity {
 public:
  VarifoldFidelity(const SimplicialShape& target, VarifoldKernel kernel);

  double value(const SimplicialShape& shape) const;
  /// Value and gradient with respect to the vertices of `shape`.
  double value_grad(const SimplicialShape& shape, Points& grad) const;

  const VarifoldKernel& kernel() const { return kernel_; }
  const SimplicialShape& target() const { return target_; }

 private:
  SimplicialShape target_;
  VarifoldKernel kernel_;
  CellFeatures target_features_;
  double target_self_;
};

}  // namespace geomatch
