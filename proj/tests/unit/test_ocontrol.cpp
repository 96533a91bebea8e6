#include <doctest.h>

#include <random>

#include <cmath>

#include "geomatch/error.hpp"
#include "geomatch/fdcheck.hpp"
#include "geomatch/ocontrol.hpp"
#include "geomatch/optim.hpp"

using namespace geomatch;
using namespace geomatch::ocontrol;
using Eigen::MatrixXd;

namespace {

// x' = sin(x) + u, L = 1/2 |u|^2, U = 1/2 |x - target|^2.
// Reduced: u = p, H = p . sin(x) + 1/2 |p|^2, running cost 1/2 |p|^2.
ControlProblem sine_problem(const Vec& target) {
  ControlProblem pb;
  const int n = static_cast<int>(target.size());
  pb.state_dim = n;
  pb.control_dim = n;
  pb.dynamics = [](const Vec& x, const Vec& u) -> Vec { return x.array().sin().matrix() + u; };
  pb.dynamics_vjp = [](const Vec& x, const Vec&, const Vec& w, Vec& gx, Vec& gu) {
    gx = (x.array().cos() * w.array()).matrix();
    gu = w;
  };
  pb.lagrangian = [](const Vec&, const Vec& u, Vec* gx, Vec* gu) {
    if (gx) {
      *gx = Vec::Zero(u.size());
      *gu = u;
    }
    return 0.5 * u.squaredNorm();
  };
  pb.endpoint = [target](const Vec& x, Vec* g) {
    if (g) *g = x - target;
    return 0.5 * (x - target).squaredNorm();
  };
  pb.hamiltonian = [](const Vec& x, const Vec& p) { return p.dot(x.array().sin().matrix()) + 0.5 * p.squaredNorm(); };
  pb.hamiltonian_grad = [](const Vec& x, const Vec& p, Vec& hx, Vec& hp) {
    hx = (p.array() * x.array().cos()).matrix();
    hp = x.array().sin().matrix() + p;
  };
  pb.hamiltonian_hvp = [](const Vec& x, const Vec& p, const Vec& dx, const Vec& dp, Vec& hx, Vec& hp) {
    hx = (-p.array() * x.array().sin() * dx.array() + x.array().cos() * dp.array()).matrix();
    hp = (x.array().cos() * dx.array()).matrix() + dp;
  };
  pb.running_cost = [](const Vec&, const Vec& p, Vec* gx, Vec* gp) {
    if (gx) {
      *gx = Vec::Zero(p.size());
      *gp = p;
    }
    return 0.5 * p.squaredNorm();
  };
  return pb;
}

// x' = B u with quadratic costs; both schemes are exact for constant optimal controls.
ControlProblem linear_problem(const MatrixXd& b, const Vec& target) {
  ControlProblem pb;
  pb.state_dim = static_cast<int>(b.rows());
  pb.control_dim = static_cast<int>(b.cols());
  pb.dynamics = [b](const Vec&, const Vec& u) -> Vec { return b * u; };
  pb.dynamics_vjp = [b](const Vec& x, const Vec&, const Vec& w, Vec& gx, Vec& gu) {
    gx = Vec::Zero(x.size());
    gu = b.transpose() * w;
  };
  pb.lagrangian = [](const Vec& x, const Vec& u, Vec* gx, Vec* gu) {
    if (gx) {
      *gx = Vec::Zero(x.size());
      *gu = u;
    }
    return 0.5 * u.squaredNorm();
  };
  pb.endpoint = [target](const Vec& x, Vec* g) {
    if (g) *g = 3.0 * (x - target);
    return 1.5 * (x - target).squaredNorm();
  };
  const MatrixXd bbt = b * b.transpose();
  pb.hamiltonian = [bbt](const Vec&, const Vec& p) { return 0.5 * p.dot(bbt * p); };
  pb.hamiltonian_grad = [bbt](const Vec& x, const Vec& p, Vec& hx, Vec& hp) {
    hx = Vec::Zero(x.size());
    hp = bbt * p;
  };
  pb.hamiltonian_hvp = [bbt](const Vec& x, const Vec&, const Vec&, const Vec& dp, Vec& hx, Vec& hp) {
    hx = Vec::Zero(x.size());
    hp = bbt * dp;
  };
  pb.running_cost = [bbt](const Vec& x, const Vec& p, Vec* gx, Vec* gp) {
    if (gx) {
      *gx = Vec::Zero(x.size());
      *gp = bbt * p;
    }
    return 0.5 * p.dot(bbt * p);
  };
  return pb;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

}  // namespace

TEST_SUITE("ocontrol") {
  TEST_CASE("zero momentum is a fixed point") {
    ControlProblem pb = sine_problem(vec3(0, 0, 0));
    // Make H vanish at p = 0 by removing the drift.
    pb.hamiltonian_grad = [](const Vec& x, const Vec& p, Vec& hx, Vec& hp) {
      hx = Vec::Zero(x.size());
      hp = p;
    };
    pb.running_cost = [](const Vec&, const Vec& p, Vec*, Vec*) { return 0.5 * p.squaredNorm(); };
    const Vec x0 = vec3(0.3, -0.1, 2.0);
    const auto tr = integrate_reduced(pb, x0, Vec::Zero(3), 20);
    for (Eigen::Index k = 0; k < tr.states.rows(); ++k) CHECK(tr.states.row(k).transpose() == x0);
    CHECK(tr.running_cost == 0.0);
    CHECK(tr.times(0) == 0.0);
    CHECK(tr.times(20) == 1.0);
  }

  TEST_CASE("linear Hamiltonian p.x integrates to exponentials") {
    ControlProblem pb;
    pb.state_dim = 2;
    pb.hamiltonian = [](const Vec& x, const Vec& p) { return p.dot(x); };
    pb.hamiltonian_grad = [](const Vec& x, const Vec& p, Vec& hx, Vec& hp) {
      hx = p;
      hp = x;
    };
    Vec x0(2), p0(2);
    x0 << 1.0, -2.0;
    p0 << 0.5, 3.0;
    const auto tr = integrate_reduced(pb, x0, p0, 100);
    CHECK((tr.states.row(100).transpose() - x0 * std::exp(1.0)).norm() <= 1e-8);
    CHECK((tr.costates.row(100).transpose() - p0 * std::exp(-1.0)).norm() <= 1e-8);
  }

  TEST_CASE("blow-up reports the failing step") {
    ControlProblem pb;
    pb.state_dim = 1;
    pb.hamiltonian = [](const Vec& x, const Vec& p) { return p(0) * x(0) * x(0); };
    pb.hamiltonian_grad = [](const Vec& x, const Vec& p, Vec& hx, Vec& hp) {
      hx = Vec::Constant(1, 2 * p(0) * x(0));
      hp = Vec::Constant(1, x(0) * x(0));
    };
    // x' = x^2 from x0 = 50 escapes to infinity well before t = 1.
    try {
      integrate_reduced(pb, Vec::Constant(1, 1e150), Vec::Constant(1, 1.0), 10);
      FAIL("expected NonFiniteState");
    } catch (const NonFiniteState& e) {
      CHECK(e.step() >= 1);
    }
  }

  TEST_CASE("gradients of both objectives are exact") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n(0.0, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec target = vec3(n(rng), n(rng), n(rng));
      const ControlProblem pb = sine_problem(target);
      const Vec x0 = vec3(n(rng), n(rng), n(rng));
      Vec p0(3);
      for (int i = 0; i < 3; ++i) p0(i) = n(rng);
      const auto s = shoot_objective(pb, x0, p0, 7);
      CHECK(relative_error(s.grad_p0, fd_gradient([&](const Vec& p) { return shoot_objective(pb, x0, p, 7).cost; }, p0)) <=
            1e-5);
      MatrixXd u(6, 3);
      for (Eigen::Index i = 0; i < u.size(); ++i) u.data()[i] = n(rng);
      const auto t = trajectory_objective(pb, x0, u);
      const Vec gu = Eigen::Map<const Vec>(t.grad_controls.data(), u.size());
      const Vec fd = fd_gradient(
          [&](const Vec& y) { return trajectory_objective(pb, x0, Eigen::Map<const MatrixXd>(y.data(), 6, 3)).cost; },
          Eigen::Map<const Vec>(u.data(), u.size()));
      CHECK(relative_error(gu, fd) <= 1e-5);
    }
  }

  TEST_CASE("zero controls and zero endpoint give zero cost") {
    ControlProblem pb = sine_problem(vec3(0, 0, 0));
    pb.endpoint = [](const Vec& x, Vec* g) {
      if (g) *g = Vec::Zero(x.size());
      return 0.0;
    };
    CHECK(trajectory_objective(pb, vec3(0, 0, 0), MatrixXd::Zero(5, 3)).cost == 0.0);
    const auto s = shoot_objective(pb, vec3(0, 0, 0), Vec::Zero(3), 5);
    CHECK(s.cost == 0.0);
    CHECK(s.grad_p0.norm() == 0.0);
  }

  TEST_CASE("control hold refinement converges") {
    const ControlProblem pb = sine_problem(vec3(1, 0, -1));
    const Vec x0 = vec3(0.2, 0.4, -0.3);
    auto cost = [&](int steps) {
      MatrixXd u(steps, 3);
      for (int k = 0; k < steps; ++k) {
        const double t = (k + 0.0) / steps;
        u.row(k) << std::cos(2 * t), t * t, -0.5 + t;
      }
      return trajectory_objective(pb, x0, u).cost;
    };
    const double c80 = cost(80), c160 = cost(160), c320 = cost(320);
    const double order = std::log2(std::abs(c80 - c160) / std::abs(c160 - c320));
    CHECK(order >= 0.9);
    CHECK(std::abs(c160 - c320) < std::abs(c80 - c160));
  }

  TEST_CASE("shooting and trajectory agree on a convex problem") {
    MatrixXd b(3, 2);
    b << 1, 0, 0.5, 1, -1, 2;
    const ControlProblem pb = linear_problem(b, vec3(1, 2, -1));
    const Vec x0 = vec3(0.1, 0.0, 0.3);
    optim::OptimOptions o;
    o.grad_tol = 1e-12;
    const auto rs = optim::minimize(
        [&](const Vec& p, Vec& g) {
          const auto s = shoot_objective(pb, x0, p, 10);
          g = s.grad_p0;
          return s.cost;
        },
        Vec::Zero(3), o);
    const auto rt = optim::minimize(
        [&](const Vec& y, Vec& g) {
          const auto t = trajectory_objective(pb, x0, Eigen::Map<const MatrixXd>(y.data(), 10, 2));
          g = Eigen::Map<const Vec>(t.grad_controls.data(), t.grad_controls.size());
          return t.cost;
        },
        Vec::Zero(20), o);
    CHECK(std::abs(rs.f - rt.f) <= 1e-6 * std::abs(rt.f));
  }

  TEST_CASE("transversality at a shooting optimum") {
    const Vec target = vec3(0.8, -0.4, 0.2);
    const ControlProblem pb = sine_problem(target);
    const Vec x0 = vec3(0.0, 0.3, -0.2);
    optim::OptimOptions o;
    o.grad_tol = 1e-12;
    const auto r = optim::minimize(
        [&](const Vec& p, Vec& g) {
          const auto s = shoot_objective(pb, x0, p, 40);
          g = s.grad_p0;
          return s.cost;
        },
        Vec::Zero(3), o);
    const auto tr = integrate_reduced(pb, x0, r.x, 40);
    Vec gu;
    pb.endpoint(tr.states.row(40).transpose(), &gu);
    const Vec p1 = tr.costates.row(40).transpose();
    CHECK((p1 + gu).norm() <= 1e-4 * (1 + gu.norm()));
  }
}
