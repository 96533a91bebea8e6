#include "geomatch/ocontrol.hpp"

#include <vector>

#include "geomatch/error.hpp"

namespace geomatch::ocontrol {

namespace {

struct Stages {
  Vec z1, z2, z3, z4;  // stage evaluation points
};

class ReducedSystem {
 public:
  explicit ReducedSystem(const ControlProblem& p) : problem_(p), n_(p.state_dim) {
    if (!p.hamiltonian_grad) throw Error("control problem lacks reduced Hamiltonian callbacks");
  }

  Vec rhs(const Vec& z) const {
    Vec hx, hp;
    problem_.hamiltonian_grad(z.head(n_), z.tail(n_), hx, hp);
    Vec out(2 * n_);
    out.head(n_) = hp;
    out.tail(n_) = -hx;
    return out;
  }

  // (d rhs / dz)^T w, expressed through one Hessian-vector product.
  Vec rhs_vjp(const Vec& z, const Vec& w) const {
    Vec hx, hp;
    problem_.hamiltonian_hvp(z.head(n_), z.tail(n_), -w.tail(n_), w.head(n_), hx, hp);
    Vec out(2 * n_);
    out.head(n_) = hx;
    out.tail(n_) = hp;
    return out;
  }

  double running(const Vec& z, Vec* grad) const {
    if (!problem_.running_cost) {
      if (grad) *grad = Vec::Zero(2 * n_);
      return 0.0;
    }
    if (!grad) return problem_.running_cost(z.head(n_), z.tail(n_), nullptr, nullptr);
    Vec gx, gp;
    const double c = problem_.running_cost(z.head(n_), z.tail(n_), &gx, &gp);
    grad->resize(2 * n_);
    grad->head(n_) = gx;
    grad->tail(n_) = gp;
    return c;
  }

  Vec step(const Vec& z, double h, Stages* st) const {
    const Vec k1 = rhs(z);
    const Vec z2 = z + 0.5 * h * k1;
    const Vec k2 = rhs(z2);
    const Vec z3 = z + 0.5 * h * k2;
    const Vec k3 = rhs(z3);
    const Vec z4 = z + h * k3;
    const Vec k4 = rhs(z4);
    if (st) *st = {z, z2, z3, z4};
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  Vec step_vjp(const Stages& st, double h, const Vec& bar) const {
    Vec bar_z = bar;
    const Vec bar_k4 = (h / 6.0) * bar;
    Vec bar_k3 = (h / 3.0) * bar;
    Vec bar_k2 = (h / 3.0) * bar;
    Vec bar_k1 = (h / 6.0) * bar;
    const Vec g4 = rhs_vjp(st.z4, bar_k4);
    bar_z += g4;
    bar_k3 += h * g4;
    const Vec g3 = rhs_vjp(st.z3, bar_k3);
    bar_z += g3;
    bar_k2 += 0.5 * h * g3;
    const Vec g2 = rhs_vjp(st.z2, bar_k2);
    bar_z += g2;
    bar_k1 += 0.5 * h * g2;
    bar_z += rhs_vjp(st.z1, bar_k1);
    return bar_z;
  }

 private:
  const ControlProblem& problem_;
  int n_;
};

Vec uniform_times(int steps) {
  Vec t(steps + 1);
  for (int i = 0; i <= steps; ++i) t(i) = static_cast<double>(i) / steps;
  return t;
}

void check_steps(int steps) {
  if (steps < 1) throw Error("number of time steps must be >= 1");
}

}  // namespace

Trajectory integrate_reduced(const ControlProblem& problem, const Vec& x0, const Vec& p0,
                             int steps) {
  check_steps(steps);
  const int n = problem.state_dim;
  if (x0.size() != n || p0.size() != n) throw DimensionMismatch("x0/p0 size != state_dim");
  ReducedSystem sys(problem);
  const double h = 1.0 / steps;
  Trajectory traj;
  traj.times = uniform_times(steps);
  traj.states.resize(steps + 1, n);
  traj.costates.resize(steps + 1, n);
  Vec z(2 * n);
  z << x0, p0;
  traj.states.row(0) = x0.transpose();
  traj.costates.row(0) = p0.transpose();
  double cost = 0.5 * sys.running(z, nullptr);
  for (int k = 0; k < steps; ++k) {
    z = sys.step(z, h, nullptr);
    if (!z.allFinite()) throw NonFiniteState(k + 1);
    traj.states.row(k + 1) = z.head(n).transpose();
    traj.costates.row(k + 1) = z.tail(n).transpose();
    cost += (k + 1 == steps ? 0.5 : 1.0) * sys.running(z, nullptr);
  }
  traj.running_cost = h * cost;
  return traj;
}

ShootResult shoot_objective(const ControlProblem& problem, const Vec& x0, const Vec& p0,
                            int steps) {
  check_steps(steps);
  const int n = problem.state_dim;
  if (x0.size() != n || p0.size() != n) throw DimensionMismatch("x0/p0 size != state_dim");
  ReducedSystem sys(problem);
  const double h = 1.0 / steps;

  std::vector<Stages> stages(steps);
  std::vector<Vec> zs(steps + 1);
  zs[0].resize(2 * n);
  zs[0] << x0, p0;
  for (int k = 0; k < steps; ++k) {
    zs[k + 1] = sys.step(zs[k], h, &stages[k]);
    if (!zs[k + 1].allFinite()) throw NonFiniteState(k + 1);
  }

  ShootResult r;
  std::vector<Vec> running_grad(steps + 1);
  double running = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    running += w * sys.running(zs[k], &running_grad[k]);
  }
  r.running_cost = h * running;
  Vec gU;
  r.endpoint_cost = problem.endpoint ? problem.endpoint(zs[steps].head(n), &gU) : 0.0;
  if (!problem.endpoint) gU = Vec::Zero(n);
  r.cost = r.running_cost + r.endpoint_cost;

  Vec bar = (0.5 * h) * running_grad[steps];
  bar.head(n) += gU;
  for (int k = steps - 1; k >= 0; --k) {
    bar = sys.step_vjp(stages[k], h, bar);
    bar += ((k == 0 ? 0.5 : 1.0) * h) * running_grad[k];
  }
  r.grad_p0 = bar.tail(n);
  return r;
}

namespace {

struct ControlStages {
  Vec x1, x2, x3, x4;
};

Vec control_step(const ControlProblem& p, const Vec& x, const Vec& u, double h,
                 ControlStages* st) {
  const Vec k1 = p.dynamics(x, u);
  const Vec x2 = x + 0.5 * h * k1;
  const Vec k2 = p.dynamics(x2, u);
  const Vec x3 = x + 0.5 * h * k2;
  const Vec k3 = p.dynamics(x3, u);
  const Vec x4 = x + h * k3;
  const Vec k4 = p.dynamics(x4, u);
  if (st) *st = {x, x2, x3, x4};
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_controls(const ControlProblem& problem, const Vec& x0, const Eigen::MatrixXd& controls) {
  if (x0.size() != problem.state_dim) throw DimensionMismatch("x0 size != state_dim");
  if (controls.cols() != problem.control_dim) throw DimensionMismatch("control width != control_dim");
  check_steps(static_cast<int>(controls.rows()));
}

}  // namespace

Trajectory simulate_controls(const ControlProblem& problem, const Vec& x0,
                             const Eigen::MatrixXd& controls) {
  check_controls(problem, x0, controls);
  const int steps = static_cast<int>(controls.rows());
  const double h = 1.0 / steps;
  Trajectory traj;
  traj.times = uniform_times(steps);
  traj.states.resize(steps + 1, problem.state_dim);
  Vec x = x0;
  traj.states.row(0) = x.transpose();
  double running = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Vec u = controls.row(k).transpose();
    if (problem.lagrangian) running += problem.lagrangian(x, u, nullptr, nullptr);
    x = control_step(problem, x, u, h, nullptr);
    if (!x.allFinite()) throw NonFiniteState(k + 1);
    traj.states.row(k + 1) = x.transpose();
  }
  traj.running_cost = h * running;
  return traj;
}

TrajectoryResult trajectory_objective(const ControlProblem& problem, const Vec& x0,
                                      const Eigen::MatrixXd& controls) {
  check_controls(problem, x0, controls);
  const int steps = static_cast<int>(controls.rows());
  const int n = problem.state_dim;
  const int k_dim = problem.control_dim;
  const double h = 1.0 / steps;

  std::vector<ControlStages> stages(steps);
  std::vector<Vec> lx(steps), lu(steps);
  TrajectoryResult r;
  Vec x = x0;
  double running = 0.0;
  for (int k = 0; k < steps; ++k) {
    const Vec u = controls.row(k).transpose();
    running += problem.lagrangian(x, u, &lx[k], &lu[k]);
    x = control_step(problem, x, u, h, &stages[k]);
    if (!x.allFinite()) throw NonFiniteState(k + 1);
  }
  r.running_cost = h * running;
  Vec lambda;
  r.endpoint_cost = problem.endpoint ? problem.endpoint(x, &lambda) : 0.0;
  if (!problem.endpoint) lambda = Vec::Zero(n);
  r.cost = r.running_cost + r.endpoint_cost;

  r.grad_controls.resize(steps, k_dim);
  Vec gx, gu;
  for (int k = steps - 1; k >= 0; --k) {
    const ControlStages& st = stages[k];
    const Vec u = controls.row(k).transpose();
    Vec bar_x = lambda;
    Vec bar_u = Vec::Zero(k_dim);
    Vec bar_k3 = (h / 3.0) * lambda;
    Vec bar_k2 = (h / 3.0) * lambda;
    Vec bar_k1 = (h / 6.0) * lambda;
    problem.dynamics_vjp(st.x4, u, (h / 6.0) * lambda, gx, gu);
    bar_x += gx;
    bar_k3 += h * gx;
    bar_u += gu;
    problem.dynamics_vjp(st.x3, u, bar_k3, gx, gu);
    bar_x += gx;
    bar_k2 += 0.5 * h * gx;
    bar_u += gu;
    problem.dynamics_vjp(st.x2, u, bar_k2, gx, gu);
    bar_x += gx;
    bar_k1 += 0.5 * h * gx;
    bar_u += gu;
    problem.dynamics_vjp(st.x1, u, bar_k1, gx, gu);
    bar_x += gx;
    bar_u += gu;
    bar_x += h * lx[k];
    bar_u += h * lu[k];
    lambda = std::move(bar_x);
    r.grad_controls.row(k) = bar_u.transpose();
  }
  return r;
}

}  // namespace geomatch::ocontrol
