#include <doctest.h>

#include <cmath>

#include "geomatch/error.hpp"
#include "geomatch/optim.hpp"

using namespace geomatch;
using Eigen::VectorXd;

TEST_SUITE("optim") {
  TEST_CASE("quadratic converges in a few iterations") {
    VectorXd c(4);
    c << 1, -2, 0.5, 3;
    const optim::Objective f = [&](const VectorXd& x, VectorXd& g) {
      g = x - c;
      return 0.5 * g.squaredNorm();
    };
    optim::OptimOptions o;
    o.grad_tol = 1e-12;
    const auto r = optim::minimize(f, VectorXd::Zero(4), o);
    CHECK(r.status == optim::Status::converged);
    CHECK((r.x - c).norm() <= 1e-10);
    CHECK(r.iterations <= 3);
  }

  TEST_CASE("Rosenbrock") {
    const optim::Objective f = [](const VectorXd& x, VectorXd& g) {
      const double a = 1 - x(0), b = x(1) - x(0) * x(0);
      g.resize(2);
      g << -2 * a - 400 * x(0) * b, 200 * b;
      return a * a + 100 * b * b;
    };
    VectorXd x0(2);
    x0 << -1.2, 1.0;
    optim::OptimOptions o;
    o.grad_tol = 1e-10;
    o.max_iters = 200;
    std::vector<double> fs;
    const auto r = optim::minimize(f, x0, o, [&](int, const VectorXd&, double fx) { fs.push_back(fx); });
    CHECK(r.status == optim::Status::converged);
    CHECK(std::abs(r.x(0) - 1) <= 1e-6);
    CHECK(std::abs(r.x(1) - 1) <= 1e-6);
    CHECK(r.iterations <= 200);
    for (std::size_t i = 1; i < fs.size(); ++i) CHECK(fs[i] <= fs[i - 1]);
    CHECK(r.history.size() == fs.size());

    // Deterministic iterate sequence.
    const auto r2 = optim::minimize(f, x0, o);
    CHECK(r2.x == r.x);
    CHECK(r2.iterations == r.iterations);
  }

  TEST_CASE("constant objective stops at once") {
    const optim::Objective f = [](const VectorXd& x, VectorXd& g) {
      g = VectorXd::Zero(x.size());
      return 4.0;
    };
    const auto r = optim::minimize(f, VectorXd::Ones(3));
    CHECK(r.status == optim::Status::converged);
    CHECK(r.iterations == 0);
  }

  TEST_CASE("non-finite start and bad options") {
    const optim::Objective f = [](const VectorXd& x, VectorXd& g) {
      g = x;
      return std::nan("");
    };
    CHECK_THROWS_AS(optim::minimize(f, VectorXd::Ones(2)), NonFiniteObjective);
    optim::OptimOptions o;
    o.c1 = 0.95;
    CHECK_THROWS_AS(o.validate(), ConfigError);
  }

  TEST_CASE("failing trial points shorten the step") {
    // log barrier: the objective throws outside x > 0.
    const optim::Objective f = [](const VectorXd& x, VectorXd& g) {
      if (x(0) <= 0) throw Error("outside domain");
      g.resize(1);
      g(0) = 1.0 - 1.0 / x(0);
      return x(0) - std::log(x(0));
    };
    VectorXd x0(1);
    x0 << 30.0;
    const auto r = optim::minimize(f, x0);
    CHECK(r.status == optim::Status::converged);
    CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-5));
  }
}
