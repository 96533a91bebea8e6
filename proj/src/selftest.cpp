#include "geomatch/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <random>

#include "geomatch/corpus.hpp"
#include "geomatch/error.hpp"
#include "geomatch/fdcheck.hpp"
#include "geomatch/hybrid.hpp"
#include "geomatch/intrinsic.hpp"
#include "geomatch/lddmm.hpp"
#include "geomatch/varifold.hpp"

namespace geomatch {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Eigen::VectorXd flat(const Points& p) { return Eigen::Map<const Eigen::VectorXd>(p.data(), p.size()); }

Points unflat(const Eigen::VectorXd& v, int d) {
  return Eigen::Map<const Points>(v.data(), v.size() / d, d);
}

CheckResult bound_check(std::string name, double err, double tol) {
  return {std::move(name), err <= tol, "max error " + sci(err) + " (tol " + sci(tol) + ")"};
}

CheckResult kernel_derivatives() {
  double worst = 0.0;
  const double h = 1e-5;
  for (auto fam : {SpatialFamily::gaussian, SpatialFamily::cauchy}) {
    const SpatialProfile p(fam, 0.8);
    for (double r2 : {0.1, 0.7, 2.3}) {
      const double fd = (p.rho(r2 + h) - p.rho(r2 - h)) / (2 * h);
      worst = std::max(worst, std::abs(fd - p.d_rho(r2)) / std::abs(fd));
    }
  }
  for (auto fam : {SphericalFamily::linear, SphericalFamily::sphere_gaussian}) {
    const SphericalProfile g(fam, 0.9);
    for (double c : {-0.6, 0.1, 0.8}) {
      const double fd = (g.gamma(c + h) - g.gamma(c - h)) / (2 * h);
      worst = std::max(worst, std::abs(fd - g.d_gamma(c)) / std::abs(fd));
    }
  }
  return bound_check("kernel-derivatives", worst, 1e-6);
}

CheckResult varifold_gradient(bool flip) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.05);
  double worst = 0.0;
  const VarifoldKernel k{SpatialProfile(SpatialFamily::gaussian, 0.7),
                         SphericalProfile(SphericalFamily::sphere_gaussian, 1.2)};
  const SimplicialShape target = corpus::ellipse(10);
  for (int trial = 0; trial < 3; ++trial) {
    SimplicialShape src = corpus::circle(12);
    Points v = src.vertices();
    for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += noise(rng);
    src = src.with_vertices(v);
    Points g = varifold_grad(src, target, k);
    if (flip) g = -g;
    const auto f = [&](const Eigen::VectorXd& x) {
      return varifold_dist_sq(src.with_vertices(unflat(x, 2)), target, k);
    };
    worst = std::max(worst, relative_error(flat(g), fd_gradient(f, flat(v))));
  }
  return bound_check("varifold-gradient", worst, 1e-5);
}

CheckResult metric_axioms(const std::string& name,
                          const std::vector<std::pair<std::string, SimplicialShape>>& shapes) {
  double self = 0.0, asym = 0.0, triangle = 0.0;
  const std::size_t n = shapes.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t a = 0; a < n; ++a) {
    const VarifoldKernel k{SpatialProfile(SpatialFamily::gaussian, 0.5), SphericalProfile()};
    for (std::size_t b = 0; b < n; ++b) {
      d[a][b] = std::sqrt(varifold_dist_sq(shapes[a].second, shapes[b].second, k));
    }
    self = std::max(self, d[a][a]);
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      asym = std::max(asym, std::abs(d[a][b] - d[b][a]));
      for (std::size_t c = 0; c < n; ++c) triangle = std::max(triangle, d[a][c] - d[a][b] - d[b][c]);
    }
  }
  const bool ok = self == 0.0 && asym <= 1e-12 && triangle <= 1e-10;
  return {name, ok, "self " + sci(self) + ", asymmetry " + sci(asym) + ", triangle excess " + sci(triangle)};
}

SplinePath wobbly_path(std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, 0.05);
  SplinePath path(4, 8, 3, 4, true);
  for (int i = 0; i < path.num_t(); ++i) {
    for (int j = 0; j < path.num_theta(); ++j) {
      const double th = 2.0 * std::acos(-1.0) * j / path.num_theta();
      const double r = 1.0 + 0.2 * i;
      path.ctrl().row(i * path.num_theta() + j) << r * std::cos(th) + 0.3 * i + noise(rng),
          0.8 * r * std::sin(th) + noise(rng);
    }
  }
  return path;
}

CheckResult path_energy_gradient(bool scale) {
  std::mt19937_64 rng(23);
  const SobolevCoeffs coeffs{1.0, 0.5, 0.25};
  const QuadratureRule quad;
  double worst = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    SplinePath path = wobbly_path(rng);
    Eigen::MatrixXd g;
    path_energy(path, coeffs, quad, &g);
    if (scale) g *= 1.01;
    const Eigen::MatrixXd base = path.ctrl();
    const auto f = [&](const Eigen::VectorXd& x) {
      SplinePath p = path;
      p.ctrl() = Eigen::Map<const Eigen::MatrixXd>(x.data(), base.rows(), base.cols());
      return path_energy(p, coeffs, quad);
    };
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(base.data(), base.size());
    const Eigen::VectorXd gv = Eigen::Map<const Eigen::VectorXd>(g.data(), g.size());
    worst = std::max(worst, relative_error(gv, fd_gradient(f, x)));
  }
  return bound_check("path-energy-gradient", worst, 1e-5);
}

struct SmallFlow {
  SimplicialShape source = corpus::circle(6);
  SimplicialShape target = corpus::ellipse(7);
  VarifoldFidelity fidelity{target, VarifoldKernel{SpatialProfile(SpatialFamily::gaussian, 0.8), {}}};
  FlowModel model = lddmm_flow_model(DeformationKernel(0.9));
  ocontrol::ControlProblem pb = flow_control_problem(model, source, fidelity, 10.0);
  Eigen::VectorXd x0 = flat(source.vertices());
};

CheckResult trajectory_gradient() {
  SmallFlow s;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  Eigen::MatrixXd u(4, s.pb.control_dim);
  for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = noise(rng);
  const auto res = ocontrol::trajectory_objective(s.pb, s.x0, u);
  const auto f = [&](const Eigen::VectorXd& x) {
    return ocontrol::trajectory_objective(s.pb, s.x0, Eigen::Map<const Eigen::MatrixXd>(x.data(), u.rows(), u.cols()))
        .cost;
  };
  const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
  const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(res.grad_controls.data(), u.size());
  return bound_check("trajectory-gradient", relative_error(g, fd_gradient(f, x)), 1e-5);
}

CheckResult shoot_gradient(bool flip) {
  SmallFlow s;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 0.3);
  Eigen::VectorXd p0(s.pb.state_dim);
  for (Eigen::Index i = 0; i < p0.size(); ++i) p0(i) = noise(rng);
  Eigen::VectorXd g = ocontrol::shoot_objective(s.pb, s.x0, p0, 10).grad_p0;
  if (flip) g = -g;
  const auto f = [&](const Eigen::VectorXd& p) { return ocontrol::shoot_objective(s.pb, s.x0, p, 10).cost; };
  return bound_check("shoot-gradient", relative_error(g, fd_gradient(f, p0)), 1e-5);
}

CheckResult hybrid_gradient() {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.3);
  const SimplicialShape q = corpus::ellipse(8);
  Points a(q.num_vertices(), 2);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = noise(rng);
  const DeformationKernel k(0.8);
  const IntrinsicStiffness stiff{0.7, StiffnessVariant::full};
  Points gq, ga;
  hybrid_lagrangian_grad(q, a, k, stiff, gq, ga);
  const auto fq = [&](const Eigen::VectorXd& x) { return hybrid_lagrangian(q.with_vertices(unflat(x, 2)), a, k, stiff); };
  const auto fa = [&](const Eigen::VectorXd& x) { return hybrid_lagrangian(q, unflat(x, 2), k, stiff); };
  const double err = std::max(relative_error(flat(gq), fd_gradient(fq, flat(q.vertices()))),
                              relative_error(flat(ga), fd_gradient(fa, flat(a))));
  return bound_check("hybrid-lagrangian-gradient", err, 1e-5);
}

ocontrol::ControlProblem free_landmarks(const FlowModel& model, int n) {
  return landmark_control_problem(model, n, 2, [](const Points& q, Points* g) {
    if (g) *g = Points::Zero(q.rows(), q.cols());
    return 0.0;
  });
}

CheckResult single_landmark() {
  // One landmark sees K(q, q) = Id, so q(t) = q0 + t p0 exactly.
  const FlowModel model = lddmm_flow_model(DeformationKernel(1.0));
  const auto pb = free_landmarks(model, 1);
  Eigen::VectorXd x0(2), p0(2);
  x0 << 0.3, -0.2;
  p0 << 1.1, 0.7;
  const auto traj = ocontrol::integrate_reduced(pb, x0, p0, 50);
  double err = 0.0;
  for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
    err = std::max(err, (traj.states.row(k).transpose() - (x0 + traj.times(k) * p0)).norm());
  }
  return bound_check("single-landmark-shooting", err, 1e-10);
}

CheckResult hamiltonian_conservation() {
  const FlowModel model = lddmm_flow_model(DeformationKernel(0.7));
  const auto pb = free_landmarks(model, 5);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.5);
  Eigen::VectorXd x0(10), p0(10);
  for (int i = 0; i < 10; ++i) {
    x0(i) = noise(rng);
    p0(i) = noise(rng);
  }
  const auto traj = ocontrol::integrate_reduced(pb, x0, p0, 100);
  const double h0 = pb.hamiltonian(x0, p0);
  double drift = 0.0;
  for (Eigen::Index k = 0; k < traj.states.rows(); ++k) {
    const double hk = pb.hamiltonian(traj.states.row(k).transpose(), traj.costates.row(k).transpose());
    drift = std::max(drift, std::abs(hk - h0) / std::abs(h0));
  }
  return bound_check("hamiltonian-conservation", drift, 1e-6);
}

template <class F>
CheckResult guarded(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

}  // namespace

std::vector<std::string> known_mutations() {
  return {"varifold-grad-sign", "path-energy-grad-scale", "shoot-grad-sign"};
}

std::vector<CheckResult> run_selftest(const SelftestOptions& opts) {
  const std::string& m = opts.mutation;
  if (!m.empty()) {
    const auto known = known_mutations();
    if (std::find(known.begin(), known.end(), m) == known.end()) throw Error("unknown mutation '" + m + "'");
  }
  std::vector<CheckResult> out;
  out.push_back(guarded("kernel-derivatives", kernel_derivatives));
  out.push_back(guarded("varifold-gradient", [&] { return varifold_gradient(m == "varifold-grad-sign"); }));
  out.push_back(guarded("metric-axioms-curves", [] { return metric_axioms("metric-axioms-curves", corpus::curve_corpus()); }));
  out.push_back(
      guarded("metric-axioms-surfaces", [] { return metric_axioms("metric-axioms-surfaces", corpus::surface_corpus()); }));
  out.push_back(guarded("path-energy-gradient", [&] { return path_energy_gradient(m == "path-energy-grad-scale"); }));
  out.push_back(guarded("trajectory-gradient", trajectory_gradient));
  out.push_back(guarded("shoot-gradient", [&] { return shoot_gradient(m == "shoot-grad-sign"); }));
  out.push_back(guarded("hybrid-lagrangian-gradient", hybrid_gradient));
  out.push_back(guarded("single-landmark-shooting", single_landmark));
  out.push_back(guarded("hamiltonian-conservation", hamiltonian_conservation));
  return out;
}

}  // namespace geomatch
