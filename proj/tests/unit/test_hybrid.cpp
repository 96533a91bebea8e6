#include <doctest.h>

#include <cmath>

#include "geomatch/corpus.hpp"
#include "geomatch/error.hpp"
#include "geomatch/fdcheck.hpp"
#include "geomatch/hybrid.hpp"
#include "helpers.hpp"

using namespace geomatch;
using Eigen::VectorXd;

TEST_SUITE("hybrid") {
  TEST_CASE("quadratic form closed forms") {
    const auto seg = testing::segment(0, 0, 2, 0);
    Points h(2, 2);
    h << 0, 0, 1, 0;
    CHECK(intrinsic_quadform(seg, h, StiffnessVariant::full) == doctest::Approx(0.5));
    CHECK(intrinsic_quadform(seg, h, StiffnessVariant::tangential) == doctest::Approx(0.5));
    h << 0, 0, 0, 1;
    CHECK(intrinsic_quadform(seg, h, StiffnessVariant::full) == doctest::Approx(0.5));
    CHECK(intrinsic_quadform(seg, h, StiffnessVariant::tangential) == doctest::Approx(0.0));

    // Linear field h = A x on a flat triangle: area * |A P|_F^2 with P the in-plane projector.
    Points v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    Cells t(1, 3);
    t << 0, 1, 2;
    const SimplicialShape tri(ShapeKind::surface, v, t, false);
    Eigen::Matrix3d a;
    a << 1, 2, 3, -1, 0.5, 2, 0, 1, -2;
    const Points hl = v * a.transpose();
    Eigen::Matrix3d p = Eigen::Matrix3d::Identity();
    p(2, 2) = 0;
    CHECK(intrinsic_quadform(tri, hl, StiffnessVariant::full) == doctest::Approx(0.5 * (a * p).squaredNorm()));
  }

  TEST_CASE("constant fields are free") {
    for (const auto& s : {corpus::star(16), corpus::icosphere(1)}) {
      Points h(s.num_vertices(), s.dim());
      h.rowwise() = Eigen::RowVectorXd::LinSpaced(s.dim(), 0.5, 2.0);
      CHECK(std::abs(intrinsic_quadform(s, h, StiffnessVariant::full)) <= 1e-12);
      if (s.kind() == ShapeKind::curve) CHECK(std::abs(intrinsic_quadform(s, h, StiffnessVariant::tangential)) <= 1e-12);
    }
    CHECK_THROWS(intrinsic_quadform(corpus::icosphere(0), Points::Zero(12, 3), StiffnessVariant::tangential));
  }

  TEST_CASE("rigid equivariance of the quadratic form") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (const auto& s : {corpus::limacon(20), corpus::torus_patch(6, 5)}) {
      const int d = s.dim();
      Points h(s.num_vertices(), d);
      for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = n(rng);
      const Eigen::MatrixXd r = testing::random_rotation(rng, d);
      const auto rs = rigid_transform(s, r, Eigen::VectorXd::Constant(d, 0.7));
      const double q0 = intrinsic_quadform(s, h, StiffnessVariant::full);
      CHECK(intrinsic_quadform(rs, h * r.transpose(), StiffnessVariant::full) == doctest::Approx(q0).epsilon(1e-12));
    }
  }

  TEST_CASE("Lagrangian relations") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n(0.0, 1.0);
    const DeformationKernel k(0.7);
    const auto q = corpus::star(12);
    for (int trial = 0; trial < 10; ++trial) {
      Points a(12, 2);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
      CHECK(hybrid_lagrangian(q, a, k, {0.0, StiffnessVariant::full}) == lddmm_lagrangian(q.vertices(), a, k));
      CHECK(hybrid_lagrangian(q, a, k, {2.0, StiffnessVariant::full}) >= lddmm_lagrangian(q.vertices(), a, k));
    }
    CHECK(hybrid_lagrangian(q, Points::Zero(12, 2), k, {1.0, StiffnessVariant::full}) == 0.0);
    // Equal momenta on a two-vertex segment give a constant velocity field.
    const auto seg = testing::segment(0, 0, 0.4, 0);
    Points a(2, 2);
    a << 0.3, -1.0, 0.3, -1.0;
    CHECK(hybrid_lagrangian(seg, a, k, {3.0, StiffnessVariant::full}) ==
          doctest::Approx(lddmm_lagrangian(seg.vertices(), a, k)).epsilon(1e-14));
  }

  TEST_CASE("gradients against central differences") {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 9; ++trial) {
      const bool surf = trial % 3 == 2;
      const SimplicialShape q = surf ? corpus::icosphere(0) : corpus::limacon(9);
      const int d = q.dim();
      const IntrinsicStiffness st{0.8, trial % 3 == 1 ? StiffnessVariant::tangential : StiffnessVariant::full};
      Points h(q.num_vertices(), d);
      for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = n(rng);
      Points gq, gh;
      intrinsic_quadform_grad(q, h, st.variant, gq, gh);
      CHECK(relative_error(testing::flat(gq), fd_gradient([&](const VectorXd& x) {
                                                return intrinsic_quadform(q.with_vertices(testing::unflat(x, d)), h, st.variant);
                                              }, testing::flat(q.vertices()))) <= 1e-5);
      CHECK(relative_error(testing::flat(gh), fd_gradient([&](const VectorXd& x) {
                                                return intrinsic_quadform(q, testing::unflat(x, d), st.variant);
                                              }, testing::flat(h))) <= 1e-5);
    }
  }

  TEST_CASE("flow model Hamiltonian") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> n(0.0, 1.0);
    const auto shape = corpus::ellipse(8);
    const DeformationKernel k(0.6);
    const FlowModel m = hybrid_flow_model(shape, k, {0.7, StiffnessVariant::full});
    Points q = testing::jitter(shape.vertices(), rng, 0.02), p(8, 2), dq(8, 2), dp(8, 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      p.data()[i] = n(rng);
      dq.data()[i] = n(rng);
      dp.data()[i] = n(rng);
    }
    Points hq, hp;
    m.hamiltonian_grad(q, p, hq, hp);
    CHECK(relative_error(testing::flat(hq), fd_gradient([&](const VectorXd& x) { return m.hamiltonian(testing::unflat(x, 2), p); },
                                                      testing::flat(q))) <= 1e-6);
    CHECK(relative_error(testing::flat(hp), fd_gradient([&](const VectorXd& x) { return m.hamiltonian(q, testing::unflat(x, 2)); },
                                                      testing::flat(p))) <= 1e-6);
    Points oq, op, a1, b1, a2, b2;
    m.hamiltonian_hvp(q, p, dq, dp, oq, op);
    const double h = 1e-6;
    m.hamiltonian_grad(q + h * dq, p + h * dp, a1, b1);
    m.hamiltonian_grad(q - h * dq, p - h * dp, a2, b2);
    CHECK(relative_error(testing::flat(oq), testing::flat((a1 - a2) / (2 * h))) <= 1e-6);
    CHECK(relative_error(testing::flat(op), testing::flat((b1 - b2) / (2 * h))) <= 1e-6);
    // Running cost 2H equals the Lagrangian at the control generated by p.
    const Points a = m.control_from_momentum(q, p);
    CHECK(2 * m.hamiltonian(q, p) == doctest::Approx(m.lagrangian(q, a, nullptr, nullptr)).epsilon(1e-10));
    const auto [outer, inner] = m.split(q, a);
    CHECK(outer + inner == doctest::Approx(m.lagrangian(q, a, nullptr, nullptr)).epsilon(1e-12));
  }

  TEST_CASE("matching") {
    const auto c = corpus::ellipse(16);
    MatchConfig cfg;
    cfg.model = Model::hybrid;
    const auto same = match_hybrid(c, c, cfg);
    CHECK(same.energy <= 1e-8);
    CHECK(same.split_energy);

    cfg.spatial_sigma = 0.5;
    cfg.optim.max_iters = 100;
    const auto r = match_hybrid(corpus::circle(16), c, cfg);
    CHECK(r.fidelity_reduction() >= 0.9);
    for (const auto& row : r.history) CHECK(row.outer + 1.0 * row.intrinsic == doctest::Approx(row.energy).epsilon(1e-9));
    CHECK(r.extras.contains("energy_split"));
  }

  TEST_CASE("surfaces") {
    const auto a = corpus::icosphere(1), b = corpus::icosphere(1, 0.8, 0.3, 0.1, 0.0);
    MatchConfig cfg;
    cfg.model = Model::hybrid;
    cfg.spatial_sigma = 0.5;
    cfg.optim.max_iters = 60;
    const auto r = match_hybrid(a, b, cfg);
    CHECK(r.fidelity_reduction() >= 0.9);
    CHECK(r.frames.back().shape.kind() == ShapeKind::surface);
  }
}
