#include "geomatch/lddmm.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "flow_kernels.hpp"
#include "geomatch/error.hpp"

namespace geomatch {

namespace {

using detail::Flat;

Flat<double> flat(const Points& p) { return Flat<double>(p.data(), p.data() + p.size()); }

Points points(const Flat<double>& v, int d) {
  const int n = static_cast<int>(v.size()) / d;
  Points out(n, d);
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

Points points(const Eigen::VectorXd& v, int d) {
  const int n = static_cast<int>(v.size()) / d;
  Points out(n, d);
  std::copy(v.data(), v.data() + v.size(), out.data());
  return out;
}

Eigen::VectorXd vec(const Points& p) {
  return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size());
}

void check_pair(const Points& q, const Points& a) {
  if (q.rows() != a.rows() || q.cols() != a.cols()) {
    throw DimensionMismatch("momentum array does not match the vertex array");
  }
}

template <class T>
void hamiltonian_grad_t(const Flat<T>& q, const Flat<T>& p, int n, int d, double sigma,
                        Flat<T>& hq, Flat<T>& hp) {
  hp = detail::kernel_apply(q, p, n, d, sigma);
  hq = detail::kernel_bilinear_grad_q(q, p, p, n, d, sigma);
  for (auto& x : hq) x = 0.5 * x;
}

}  // namespace

Points lddmm_velocity(const Points& q, const Points& a, const DeformationKernel& kernel) {
  check_pair(q, a);
  const int n = static_cast<int>(q.rows()), d = static_cast<int>(q.cols());
  return points(detail::kernel_apply(flat(q), flat(a), n, d, kernel.sigma), d);
}

double lddmm_lagrangian(const Points& q, const Points& a, const DeformationKernel& kernel) {
  const Points v = lddmm_velocity(q, a, kernel);
  return vec(a).dot(vec(v));
}

double lddmm_lagrangian_grad(const Points& q, const Points& a, const DeformationKernel& kernel,
                             Points& grad_q, Points& grad_a) {
  check_pair(q, a);
  const int n = static_cast<int>(q.rows()), d = static_cast<int>(q.cols());
  const Flat<double> fq = flat(q), fa = flat(a);
  const Points v = points(detail::kernel_apply(fq, fa, n, d, kernel.sigma), d);
  grad_a = 2.0 * v;
  grad_q = points(detail::kernel_bilinear_grad_q(fq, fa, fa, n, d, kernel.sigma), d);
  return vec(a).dot(vec(v));
}

void lddmm_velocity_vjp(const Points& q, const Points& a, const Points& w,
                        const DeformationKernel& kernel, Points& grad_q, Points& grad_a) {
  check_pair(q, a);
  check_pair(q, w);
  const int n = static_cast<int>(q.rows()), d = static_cast<int>(q.cols());
  const Flat<double> fq = flat(q), fw = flat(w);
  grad_a = points(detail::kernel_apply(fq, fw, n, d, kernel.sigma), d);
  grad_q = points(detail::kernel_bilinear_grad_q(fq, fw, flat(a), n, d, kernel.sigma), d);
}

double lddmm_hamiltonian(const Points& q, const Points& p, const DeformationKernel& kernel) {
  return 0.5 * lddmm_lagrangian(q, p, kernel);
}

void lddmm_hamiltonian_grad(const Points& q, const Points& p, const DeformationKernel& kernel,
                            Points& grad_q, Points& grad_p) {
  check_pair(q, p);
  const int n = static_cast<int>(q.rows()), d = static_cast<int>(q.cols());
  Flat<double> hq, hp;
  hamiltonian_grad_t(flat(q), flat(p), n, d, kernel.sigma, hq, hp);
  grad_q = points(hq, d);
  grad_p = points(hp, d);
}

void lddmm_hamiltonian_hvp(const Points& q, const Points& p, const Points& dq, const Points& dp,
                           const DeformationKernel& kernel, Points& out_q, Points& out_p) {
  check_pair(q, p);
  const int n = static_cast<int>(q.rows()), d = static_cast<int>(q.cols());
  const auto m = static_cast<std::size_t>(q.size());
  Flat<Dual> sq(m), sp(m);
  for (std::size_t i = 0; i < m; ++i) {
    sq[i] = Dual(q.data()[i], dq.data()[i]);
    sp[i] = Dual(p.data()[i], dp.data()[i]);
  }
  Flat<Dual> hq, hp;
  hamiltonian_grad_t(sq, sp, n, d, kernel.sigma, hq, hp);
  out_q.resize(n, d);
  out_p.resize(n, d);
  for (std::size_t i = 0; i < m; ++i) {
    out_q.data()[i] = hq[i].d;
    out_p.data()[i] = hp[i].d;
  }
}

FlowModel lddmm_flow_model(const DeformationKernel& kernel) {
  FlowModel m;
  m.kernel = kernel;
  m.lagrangian = [kernel](const Points& q, const Points& a, Points* gq, Points* ga) {
    if (!gq) return lddmm_lagrangian(q, a, kernel);
    return lddmm_lagrangian_grad(q, a, kernel, *gq, *ga);
  };
  m.hamiltonian = [kernel](const Points& q, const Points& p) {
    return lddmm_hamiltonian(q, p, kernel);
  };
  m.hamiltonian_grad = [kernel](const Points& q, const Points& p, Points& hq, Points& hp) {
    lddmm_hamiltonian_grad(q, p, kernel, hq, hp);
  };
  m.hamiltonian_hvp = [kernel](const Points& q, const Points& p, const Points& dq,
                               const Points& dp, Points& hq, Points& hp) {
    lddmm_hamiltonian_hvp(q, p, dq, dp, kernel, hq, hp);
  };
  m.control_from_momentum = [](const Points&, const Points& p) { return p; };
  return m;
}

ocontrol::ControlProblem landmark_control_problem(const FlowModel& model, int num_points, int d,
                                                  LandmarkEndpoint endpoint) {
  const int n = num_points * d;
  ocontrol::ControlProblem pb;
  pb.state_dim = n;
  pb.control_dim = n;
  const DeformationKernel kernel = model.kernel;
  pb.dynamics = [kernel, d](const ocontrol::Vec& x, const ocontrol::Vec& u) {
    return vec(lddmm_velocity(points(x, d), points(u, d), kernel));
  };
  pb.dynamics_vjp = [kernel, d](const ocontrol::Vec& x, const ocontrol::Vec& u,
                                const ocontrol::Vec& w, ocontrol::Vec& gx, ocontrol::Vec& gu) {
    Points gq, ga;
    lddmm_velocity_vjp(points(x, d), points(u, d), points(w, d), kernel, gq, ga);
    gx = vec(gq);
    gu = vec(ga);
  };
  pb.lagrangian = [&model, d](const ocontrol::Vec& x, const ocontrol::Vec& u, ocontrol::Vec* gx,
                              ocontrol::Vec* gu) {
    if (!gx) return model.lagrangian(points(x, d), points(u, d), nullptr, nullptr);
    Points gq, ga;
    const double val = model.lagrangian(points(x, d), points(u, d), &gq, &ga);
    *gx = vec(gq);
    *gu = vec(ga);
    return val;
  };
  pb.endpoint = [endpoint = std::move(endpoint), d](const ocontrol::Vec& x, ocontrol::Vec* grad) {
    if (!grad) return endpoint(points(x, d), nullptr);
    Points g;
    const double val = endpoint(points(x, d), &g);
    *grad = vec(g);
    return val;
  };
  pb.hamiltonian = [&model, d](const ocontrol::Vec& x, const ocontrol::Vec& p) {
    return model.hamiltonian(points(x, d), points(p, d));
  };
  pb.hamiltonian_grad = [&model, d](const ocontrol::Vec& x, const ocontrol::Vec& p,
                                    ocontrol::Vec& hx, ocontrol::Vec& hp) {
    Points gq, gp;
    model.hamiltonian_grad(points(x, d), points(p, d), gq, gp);
    hx = vec(gq);
    hp = vec(gp);
  };
  pb.hamiltonian_hvp = [&model, d](const ocontrol::Vec& x, const ocontrol::Vec& p,
                                   const ocontrol::Vec& dx, const ocontrol::Vec& dp,
                                   ocontrol::Vec& hx, ocontrol::Vec& hp) {
    Points oq, op;
    model.hamiltonian_hvp(points(x, d), points(p, d), points(dx, d), points(dp, d), oq, op);
    hx = vec(oq);
    hp = vec(op);
  };
  pb.running_cost = [&model, d](const ocontrol::Vec& x, const ocontrol::Vec& p, ocontrol::Vec* gx,
                                ocontrol::Vec* gp) {
    const Points q = points(x, d), pp = points(p, d);
    if (gx) {
      Points gq, gpp;
      model.hamiltonian_grad(q, pp, gq, gpp);
      *gx = 2.0 * vec(gq);
      *gp = 2.0 * vec(gpp);
    }
    return 2.0 * model.hamiltonian(q, pp);
  };
  return pb;
}

ocontrol::ControlProblem flow_control_problem(const FlowModel& model, const SimplicialShape& source,
                                              const VarifoldFidelity& fidelity, double lambda) {
  return landmark_control_problem(
      model, source.num_vertices(), source.dim(),
      [&source, &fidelity, lambda](const Points& q, Points* grad) {
        const SimplicialShape shape = source.with_vertices(q);
        if (!grad) return lambda * fidelity.value(shape);
        const double val = fidelity.value_grad(shape, *grad);
        *grad *= lambda;
        return lambda * val;
      });
}

namespace {

double min_vertex_separation(const Points& q) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < q.rows(); ++i) {
    for (int j = i + 1; j < q.rows(); ++j) best = std::min(best, (q.row(i) - q.row(j)).norm());
  }
  return best;
}

Eigen::MatrixXd controls_from(const Eigen::VectorXd& x, int steps, int n) {
  Eigen::MatrixXd c(steps, n);
  for (int k = 0; k < steps; ++k) c.row(k) = x.segment(static_cast<Eigen::Index>(k) * n, n).transpose();
  return c;
}

}  // namespace

MatchReport match_flow(const SimplicialShape& source, const SimplicialShape& target,
                       const MatchConfig& cfg, const FlowModel& model) {
  const auto started = std::chrono::steady_clock::now();
  if (source.kind() != target.kind()) throw KindMismatch("source and target kinds differ");
  if (source.dim() != target.dim()) throw DimensionMismatch("source and target dimensions differ");
  const int d = source.dim();
  const int n = source.num_vertices() * d;
  const VarifoldFidelity fidelity(target, cfg.varifold_kernel());
  const ocontrol::ControlProblem pb = flow_control_problem(model, source, fidelity, cfg.lambda);
  const Eigen::VectorXd x0 = vec(source.vertices());
  const bool shooting = cfg.solver == Solver::shooting;
  const int steps = shooting ? cfg.flow.shoot_steps : cfg.flow.time_steps;
  const double h = 1.0 / steps;

  MatchReport report;
  report.model = cfg.model;
  report.solver = cfg.solver;
  report.split_energy = static_cast<bool>(model.split);
  report.initial_fidelity = fidelity.value(source);

  // Path states and per-sample controls for a given optimization variable.
  struct PathEval {
    ocontrol::Trajectory traj;
    Eigen::MatrixXd controls;  // one row per control sample
  };
  auto evaluate_path = [&](const Eigen::VectorXd& x) {
    PathEval pe;
    if (shooting) {
      pe.traj = ocontrol::integrate_reduced(pb, x0, x, steps);
      pe.controls.resize(steps + 1, n);
      for (int k = 0; k <= steps; ++k) {
        pe.controls.row(k) = vec(model.control_from_momentum(
                                     points(Eigen::VectorXd(pe.traj.states.row(k).transpose()), d),
                                     points(Eigen::VectorXd(pe.traj.costates.row(k).transpose()), d)))
                                 .transpose();
      }
    } else {
      pe.controls = controls_from(x, steps, n);
      pe.traj = ocontrol::simulate_controls(pb, x0, pe.controls);
    }
    return pe;
  };
  // Outer/intrinsic running-cost split, using each scheme's own quadrature.
  auto split_of = [&](const PathEval& pe, std::vector<std::pair<double, double>>* per_step) {
    std::pair<double, double> acc{0.0, 0.0};
    const int samples = static_cast<int>(pe.controls.rows());
    for (int k = 0; k < samples; ++k) {
      const Points q = points(Eigen::VectorXd(pe.traj.states.row(k).transpose()), d);
      const Points a = points(Eigen::VectorXd(pe.controls.row(k).transpose()), d);
      const auto s = model.split(q, a);
      const double w = shooting && (k == 0 || k == steps) ? 0.5 : 1.0;
      acc.first += w * h * s.first;
      acc.second += w * h * s.second;
      if (per_step) per_step->push_back(s);
    }
    return acc;
  };

  auto record = [&](int iter, const Eigen::VectorXd& x, double) {
    const PathEval pe = evaluate_path(x);
    EnergyRow row;
    row.iter = iter;
    row.energy = pe.traj.running_cost;
    row.fidelity = fidelity.value(source.with_vertices(
        points(Eigen::VectorXd(pe.traj.states.row(steps).transpose()), d)));
    row.total = row.energy + cfg.lambda * row.fidelity;
    if (model.split) std::tie(row.outer, row.intrinsic) = split_of(pe, nullptr);
    report.history.push_back(row);
  };

  optim::Objective objective;
  Eigen::VectorXd start;
  if (shooting) {
    start = Eigen::VectorXd::Zero(n);
    objective = [&](const Eigen::VectorXd& p0, Eigen::VectorXd& grad) {
      const ocontrol::ShootResult r = ocontrol::shoot_objective(pb, x0, p0, steps);
      grad = r.grad_p0;
      return r.cost;
    };
  } else {
    start = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(steps) * n);
    objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
      const ocontrol::TrajectoryResult r = ocontrol::trajectory_objective(pb, x0, controls_from(x, steps, n));
      grad.resize(x.size());
      for (int k = 0; k < steps; ++k) {
        grad.segment(static_cast<Eigen::Index>(k) * n, n) = r.grad_controls.row(k).transpose();
      }
      return r.cost;
    };
  }

  const optim::Result opt = optim::minimize(objective, start, cfg.optim, record);
  report.status = opt.status;
  report.iterations = opt.iterations;
  report.evaluations = opt.evaluations;

  const PathEval best = evaluate_path(opt.x);
  report.energy = best.traj.running_cost;
  report.path_times = best.traj.times;
  double min_sep = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= steps; ++k) {
    const Points q = points(Eigen::VectorXd(best.traj.states.row(k).transpose()), d);
    min_sep = std::min(min_sep, min_vertex_separation(q));
    report.path.push_back(source.with_vertices(q));
  }
  report.fidelity = fidelity.value(report.path.back());
  report.total = report.energy + cfg.lambda * report.fidelity;
  if (min_sep < 1e-8 * model.kernel.sigma) {
    std::ostringstream msg;
    msg << "near-coincident vertices (min separation " << min_sep
        << "); kernel matrix is ill-conditioned";
    report.warnings.push_back(msg.str());
  }
  if (shooting) {
    report.momentum = opt.x.transpose();
  } else {
    report.momentum = controls_from(opt.x, steps, n);
  }

  for (double t : cfg.frame_times) {
    const double pos = std::clamp(t, 0.0, 1.0) * steps;
    const int k = std::min(static_cast<int>(std::floor(pos)), steps - 1);
    const double w = pos - k;
    const Points q = (1.0 - w) * report.path[k].vertices() + w * report.path[k + 1].vertices();
    report.frames.push_back({t, source.with_vertices(q)});
  }

  report.extras["kernel_sigma"] = model.kernel.sigma;
  report.extras["min_vertex_separation"] = min_sep;
  if (model.split) {
    std::vector<std::pair<double, double>> per_step;
    const auto totals = split_of(best, &per_step);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < per_step.size(); ++k) {
      rows.push_back({{"t", static_cast<double>(k) * h},
                      {"outer", per_step[k].first},
                      {"intrinsic", per_step[k].second}});
    }
    report.extras["energy_split"] = rows;
    report.extras["outer_energy"] = totals.first;
    report.extras["intrinsic_energy"] = totals.second;
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

MatchReport match_lddmm(const SimplicialShape& source, const SimplicialShape& target,
                        const MatchConfig& cfg) {
  const MatchConfig resolved = cfg.resolved(source, target);
  return match_flow(source, target, resolved, lddmm_flow_model(DeformationKernel(resolved.flow.sigma)));
}

}  // namespace geomatch
