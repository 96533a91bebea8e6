#pragma once

#include <Eigen/Dense>
#include <functional>

/// Finite-dimensional optimal control: reduced Hamiltonian flows, shooting and
/// trajectory optimization with exact discrete-adjoint gradients.
///
/// Time grid is uniform on [0, 1] with step h = 1 / steps; both schemes use
/// classical RK4. Only normal extremals are considered.
namespace geomatch::ocontrol {

using Vec = Eigen::VectorXd;

struct ControlProblem {
  int state_dim = 0;
  int control_dim = 0;

  // Trajectory optimization: x' = f(x, u), cost sum_i L(x_i, u_i) h + U(x_N).
  std::function<Vec(const Vec& x, const Vec& u)> dynamics;
  /// gx = (df/dx)^T w, gu = (df/du)^T w.
  std::function<void(const Vec& x, const Vec& u, const Vec& w, Vec& gx, Vec& gu)> dynamics_vjp;
  /// L(x, u); fills gradients when the pointers are non-null.
  std::function<double(const Vec& x, const Vec& u, Vec* gx, Vec* gu)> lagrangian;

  /// Endpoint cost U(x); fills its gradient when `grad` is non-null.
  std::function<double(const Vec& x, Vec* grad)> endpoint;

  // Shooting: x' = dH/dp, p' = -dH/dx.
  std::function<double(const Vec& x, const Vec& p)> hamiltonian;
  std::function<void(const Vec& x, const Vec& p, Vec& hx, Vec& hp)> hamiltonian_grad;
  /// Hessian-vector product: (H_xx dx + H_xp dp, H_px dx + H_pp dp).
  std::function<void(const Vec& x, const Vec& p, const Vec& dx, const Vec& dp, Vec& hx, Vec& hp)>
      hamiltonian_hvp;
  /// Running cost L(x, eta(x, p)) along the reduced flow; optional.
  std::function<double(const Vec& x, const Vec& p, Vec* gx, Vec* gp)> running_cost;
};

struct Trajectory {
  Vec times;
  /// (steps + 1) x n, one row per time sample.
  Eigen::MatrixXd states;
  /// Shooting only; empty for trajectory optimization.
  Eigen::MatrixXd costates;
  double running_cost = 0.0;
};

/// RK4 integration of the reduced Hamiltonian system; running cost by the
/// trapezoid rule. Throws NonFiniteState naming the failing step.
Trajectory integrate_reduced(const ControlProblem& problem, const Vec& x0, const Vec& p0,
                             int steps);

struct ShootResult {
  double cost = 0.0;
  double running_cost = 0.0;
  double endpoint_cost = 0.0;
  Vec grad_p0;
};

/// Cost of the trajectory launched from (x0, p0) and its exact gradient in p0.
ShootResult shoot_objective(const ControlProblem& problem, const Vec& x0, const Vec& p0,
                            int steps);

/// State trajectory under piecewise-constant controls (row i acts on [t_i, t_{i+1})).
Trajectory simulate_controls(const ControlProblem& problem, const Vec& x0,
                             const Eigen::MatrixXd& controls);

struct TrajectoryResult {
  double cost = 0.0;
  double running_cost = 0.0;
  double endpoint_cost = 0.0;
  /// Same shape as the controls.
  Eigen::MatrixXd grad_controls;
};

/// Left-rectangle running cost plus endpoint cost; gradient by the discrete
/// adjoint of the RK4 scheme. The number of steps is controls.rows().
TrajectoryResult trajectory_objective(const ControlProblem& problem, const Vec& x0,
                                      const Eigen::MatrixXd& controls);

}  // namespace geomatch::ocontrol
