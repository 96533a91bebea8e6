#pragma once

#include "geomatch/kernels.hpp"
#include "geomatch/lddmm.hpp"
#include "geomatch/match.hpp"
#include "geomatch/shapes.hpp"

namespace geomatch {

/// Discrete H^1 stiffness Lambda(q) of the hybrid metric, applied simplex by
/// simplex and never assembled.
struct IntrinsicStiffness {
  double weight = 1.0;
  StiffnessVariant variant = StiffnessVariant::full;
};

/// h^T Lambda(q) h for a per-vertex field h (N_V x d), without the weight.
///
/// Curves: sum |h_j - h_i|^2 / |q_j - q_i| (full) or the same with the
/// difference projected on the unit edge direction (tangential).
/// Surfaces: sum |h_i (x) (q_k - q_j) + h_j (x) (q_i - q_k) + h_k (x) (q_j - q_i)|_F^2 / (4 A_ijk).
double intrinsic_quadform(const SimplicialShape& q, const Points& h, StiffnessVariant variant);
/// Value with gradients in the vertex positions and in h.
double intrinsic_quadform_grad(const SimplicialShape& q, const Points& h, StiffnessVariant variant,
                               Points& grad_q, Points& grad_h);

/// a^T K(q) a + weight * intrinsic_quadform(q, K(q) a); vertex positions taken from `q`.
double hybrid_lagrangian(const SimplicialShape& q, const Points& a, const DeformationKernel& kernel,
                         const IntrinsicStiffness& stiffness);
double hybrid_lagrangian_grad(const SimplicialShape& q, const Points& a,
                              const DeformationKernel& kernel, const IntrinsicStiffness& stiffness,
                              Points& grad_q, Points& grad_a);

/// Flow model of the hybrid metric on the connectivity of `shape`.
///
/// Its reduced Hamiltonian is 1/2 p^T K a with a solving (I + weight Lambda K) a = p.
FlowModel hybrid_flow_model(const SimplicialShape& shape, const DeformationKernel& kernel,
                            const IntrinsicStiffness& stiffness);

MatchReport match_hybrid(const SimplicialShape& source, const SimplicialShape& target,
                         const MatchConfig& cfg);

}  // namespace geomatch
