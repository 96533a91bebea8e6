#include <doctest.h>

#include <cmath>

#include "geomatch/corpus.hpp"
#include "geomatch/error.hpp"
#include "geomatch/fdcheck.hpp"
#include "geomatch/lddmm.hpp"
#include "helpers.hpp"

using namespace geomatch;
using Eigen::VectorXd;

TEST_SUITE("lddmm") {
  TEST_CASE("velocity and Lagrangian closed forms") {
    const DeformationKernel k(0.5);
    Points q(1, 2), a(1, 2);
    q << 0.3, 0.1;
    a << 1.5, -2.0;
    CHECK((lddmm_velocity(q, a, k) - a).norm() == 0.0);
    CHECK(lddmm_lagrangian(q, a, k) == doctest::Approx(a.squaredNorm()));
    CHECK(lddmm_velocity(q, Points::Zero(1, 2), k).norm() == 0.0);
    CHECK(lddmm_lagrangian(q, Points::Zero(1, 2), k) == 0.0);

    Points q2(2, 2), a2(2, 2);
    q2 << 0, 0, 0, 0;
    a2 << 1, 2, 1, 2;
    CHECK(lddmm_lagrangian(q2, a2, k) == doctest::Approx(4 * 5.0));

    q2 << 0, 0, 3, 0;
    a2 << 1, 0, 0, 2;
    const Points v = lddmm_velocity(q2, a2, k);
    CHECK((v.row(0) - a2.row(0)).norm() <= std::exp(-9 / 0.25) * a2.row(1).norm() + 1e-300);
  }

  TEST_CASE("kernel quadratic form is nonnegative") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Points q(8, 3), a(8, 3);
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        q.data()[i] = 0.3 * n(rng);
        a.data()[i] = n(rng);
      }
      CHECK(lddmm_lagrangian(q, a, DeformationKernel(0.9)) >= 0.0);
    }
  }

  TEST_CASE("derivatives against central differences") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 1.0);
    const DeformationKernel k(0.8);
    for (int trial = 0; trial < 10; ++trial) {
      Points q(5, 2), a(5, 2), w(5, 2), dq(5, 2), dp(5, 2);
      for (Eigen::Index i = 0; i < q.size(); ++i) {
        q.data()[i] = 0.6 * n(rng);
        a.data()[i] = n(rng);
        w.data()[i] = n(rng);
        dq.data()[i] = n(rng);
        dp.data()[i] = n(rng);
      }
      Points gq, ga;
      lddmm_lagrangian_grad(q, a, k, gq, ga);
      CHECK(relative_error(testing::flat(gq), fd_gradient([&](const VectorXd& x) {
                                                return lddmm_lagrangian(testing::unflat(x, 2), a, k);
                                              }, testing::flat(q))) <= 1e-6);
      CHECK(relative_error(testing::flat(ga), fd_gradient([&](const VectorXd& x) {
                                                return lddmm_lagrangian(q, testing::unflat(x, 2), k);
                                              }, testing::flat(a))) <= 1e-6);
      Points vq, va;
      lddmm_velocity_vjp(q, a, w, k, vq, va);
      auto wv = [&](const Points& qq, const Points& aa) { return testing::flat(w).dot(testing::flat(lddmm_velocity(qq, aa, k))); };
      CHECK(relative_error(testing::flat(vq), fd_gradient([&](const VectorXd& x) { return wv(testing::unflat(x, 2), a); },
                                                         testing::flat(q))) <= 1e-6);
      CHECK(relative_error(testing::flat(va), fd_gradient([&](const VectorXd& x) { return wv(q, testing::unflat(x, 2)); },
                                                         testing::flat(a))) <= 1e-6);
      Points hq, hp;
      lddmm_hamiltonian_grad(q, a, k, hq, hp);
      CHECK(relative_error(testing::flat(hp), testing::flat(lddmm_velocity(q, a, k))) <= 1e-14);
      // Hessian-vector product: directional derivative of the gradient.
      Points oq, op;
      lddmm_hamiltonian_hvp(q, a, dq, dp, k, oq, op);
      const double h = 1e-6;
      Points gq1, gp1, gq2, gp2;
      lddmm_hamiltonian_grad(q + h * dq, a + h * dp, k, gq1, gp1);
      lddmm_hamiltonian_grad(q - h * dq, a - h * dp, k, gq2, gp2);
      CHECK(relative_error(testing::flat(oq), testing::flat((gq1 - gq2) / (2 * h))) <= 1e-6);
      CHECK(relative_error(testing::flat(op), testing::flat((gp1 - gp2) / (2 * h))) <= 1e-6);
    }
  }

  TEST_CASE("zero controls leave the shape in place") {
    const auto src = corpus::star(12);
    const VarifoldFidelity fid(corpus::circle(10), {SpatialProfile(SpatialFamily::gaussian, 0.5), {}});
    const FlowModel m = lddmm_flow_model(DeformationKernel(0.7));
    const auto pb = flow_control_problem(m, src, fid, 10.0);
    const auto tr = ocontrol::simulate_controls(pb, testing::flat(src.vertices()), Eigen::MatrixXd::Zero(6, pb.control_dim));
    for (Eigen::Index k = 0; k < tr.states.rows(); ++k) CHECK(tr.states.row(k).transpose() == testing::flat(src.vertices()));
  }

  TEST_CASE("matching to itself is free") {
    const auto c = corpus::ellipse(24);
    for (Solver s : {Solver::trajectory, Solver::shooting}) {
      MatchConfig cfg;
      cfg.solver = s;
      const auto r = match_lddmm(c, c, cfg);
      CHECK(r.energy <= 1e-8);
      CHECK(r.fidelity <= 1e-8);
      CHECK(r.iterations <= 5);
    }
  }

  TEST_CASE("circle to translated circle") {
    const auto a = corpus::circle(32), b = corpus::circle(32, 1.0, 0.6, 0.2);
    MatchConfig cfg;
    cfg.spatial_sigma = 0.5;
    cfg.optim.max_iters = 200;
    const auto r = match_lddmm(a, b, cfg);
    CHECK(r.fidelity_reduction() >= 0.95);
    for (const auto& s : r.path) CHECK(s.simplices() == a.simplices());
    CHECK(r.frames.size() == 5);
    CHECK(r.momentum.rows() == cfg.flow.time_steps);
    CHECK(r.path.size() == static_cast<std::size_t>(cfg.flow.time_steps + 1));
  }

  TEST_CASE("translation equivariance") {
    const auto a = corpus::circle(12), b = corpus::ellipse(12);
    MatchConfig cfg;
    cfg.spatial_sigma = 0.5;
    cfg.flow.sigma = 0.8;
    cfg.optim.grad_tol = 1e-10;
    cfg.optim.max_iters = 2000;
    const auto r0 = match_lddmm(a, b, cfg);
    const Eigen::Vector2d c(3.0, -1.0);
    const auto r1 = match_lddmm(rigid_transform(a, Eigen::Matrix2d::Identity(), c),
                                rigid_transform(b, Eigen::Matrix2d::Identity(), c), cfg);
    CHECK(std::abs(r1.total - r0.total) <= 1e-6 * r0.total);
  }

  TEST_CASE("near-coincident vertices are flagged") {
    Points v(4, 2);
    v << 0, 0, 1e-9, 0, 1, 1, 0, 1;
    const auto s = make_polyline(v, true);
    MatchConfig cfg;
    cfg.optim.max_iters = 3;
    const auto r = match_lddmm(s, corpus::circle(8), cfg);
    CHECK(r.warnings.size() == 1);
  }
}
