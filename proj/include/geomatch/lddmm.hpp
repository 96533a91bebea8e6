#pragma once

#include <functional>

#include "geomatch/kernels.hpp"
#include "geomatch/match.hpp"
#include "geomatch/ocontrol.hpp"
#include "geomatch/shapes.hpp"
#include "geomatch/varifold.hpp"

namespace geomatch {

/// v(i) = sum_j K(q_i, q_j) a_j.
Points lddmm_velocity(const Points& q, const Points& a, const DeformationKernel& kernel);

/// a^T K(q) a, the squared RKHS norm of the horizontal field generated by a.
double lddmm_lagrangian(const Points& q, const Points& a, const DeformationKernel& kernel);
double lddmm_lagrangian_grad(const Points& q, const Points& a, const DeformationKernel& kernel,
                             Points& grad_q, Points& grad_a);

/// grad_q = d(w . v)/dq and grad_a = d(w . v)/da with v = lddmm_velocity(q, a).
void lddmm_velocity_vjp(const Points& q, const Points& a, const Points& w,
                        const DeformationKernel& kernel, Points& grad_q, Points& grad_a);

/// Reduced Hamiltonian 1/2 p^T K(q) p.
double lddmm_hamiltonian(const Points& q, const Points& p, const DeformationKernel& kernel);
void lddmm_hamiltonian_grad(const Points& q, const Points& p, const DeformationKernel& kernel,
                            Points& grad_q, Points& grad_p);
void lddmm_hamiltonian_hvp(const Points& q, const Points& p, const Points& dq, const Points& dp,
                           const DeformationKernel& kernel, Points& out_q, Points& out_p);

/// Running cost and Hamiltonian of a kernel flow q' = K(q) a.
///
/// The Hamiltonian is normalized so that q' = dH/dp and the running cost
/// along the reduced flow equals 2H = L(q, a(q, p)).
struct FlowModel {
  DeformationKernel kernel;
  std::function<double(const Points& q, const Points& a, Points* gq, Points* ga)> lagrangian;
  std::function<double(const Points& q, const Points& p)> hamiltonian;
  std::function<void(const Points& q, const Points& p, Points& hq, Points& hp)> hamiltonian_grad;
  std::function<void(const Points& q, const Points& p, const Points& dq, const Points& dp,
                     Points& hq, Points& hp)>
      hamiltonian_hvp;
  /// Control a generated by momentum p (identity for pure LDDMM).
  std::function<Points(const Points& q, const Points& p)> control_from_momentum;
  /// Optional (outer, intrinsic) split of L(q, a).
  std::function<std::pair<double, double>(const Points& q, const Points& a)> split;
};

FlowModel lddmm_flow_model(const DeformationKernel& kernel);

/// Endpoint cost U(q) of a landmark problem; fills the gradient when non-null.
using LandmarkEndpoint = std::function<double(const Points& q, Points* grad)>;

/// Optimal control problem of a kernel flow on `num_points` landmarks in R^d.
/// The model must outlive the returned problem.
ocontrol::ControlProblem landmark_control_problem(const FlowModel& model, int num_points, int d,
                                                  LandmarkEndpoint endpoint);

/// Optimal control problem of a flow on the vertices of `source`, with endpoint
/// cost lambda * fidelity(shape(q(1))). States and controls are flattened row-major.
ocontrol::ControlProblem flow_control_problem(const FlowModel& model, const SimplicialShape& source,
                                              const VarifoldFidelity& fidelity, double lambda);

/// Trajectory or shooting solver shared by the LDDMM and hybrid matchers.
/// `cfg` must already be resolved.
MatchReport match_flow(const SimplicialShape& source, const SimplicialShape& target,
                       const MatchConfig& cfg, const FlowModel& model);

MatchReport match_lddmm(const SimplicialShape& source, const SimplicialShape& target,
                        const MatchConfig& cfg);

}  // namespace geomatch
