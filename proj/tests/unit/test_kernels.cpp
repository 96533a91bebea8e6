#include <doctest.h>

#include <cmath>

#include "geomatch/error.hpp"
#include "geomatch/kernels.hpp"
#include "helpers.hpp"

using namespace geomatch;

TEST_SUITE("kernels") {
  TEST_CASE("profile values") {
    CHECK(SpatialProfile(SpatialFamily::gaussian, 0.3).rho(0.0) == 1.0);
    CHECK(SpatialProfile(SpatialFamily::cauchy, 1.0).rho(1.0) == doctest::Approx(0.5));
    CHECK(SphericalProfile(SphericalFamily::linear, 1.0).gamma(1.0) == 1.0);
    CHECK(SphericalProfile(SphericalFamily::sphere_gaussian, 0.37).gamma(1.0) == doctest::Approx(1.0));
    CHECK(SphericalProfile(SphericalFamily::sphere_gaussian, std::sqrt(2.0)).gamma(0.0) ==
          doctest::Approx(0.36787944117144233).epsilon(1e-12));
    // Slightly out-of-range cosines are clamped.
    CHECK(SphericalProfile(SphericalFamily::linear, 1.0).gamma(1.0 + 1e-13) == 1.0);
    CHECK_THROWS(SpatialProfile(SpatialFamily::gaussian, 0.0));
    CHECK_THROWS(DeformationKernel(-1.0));
  }

  TEST_CASE("profile derivatives against central differences") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> r2(0.0, 4.0), cs(-0.99, 0.99), sg(0.3, 2.0);
    const double h = 1e-5;
    for (int i = 0; i < 100; ++i) {
      for (auto fam : {SpatialFamily::gaussian, SpatialFamily::cauchy}) {
        const SpatialProfile p(fam, sg(rng));
        const double x = r2(rng) + 0.01;
        const double fd = (p.rho(x + h) - p.rho(x - h)) / (2 * h);
        CHECK(std::abs(fd - p.d_rho(x)) <= 1e-6 * std::max(std::abs(fd), 1e-3));
      }
      for (auto fam : {SphericalFamily::linear, SphericalFamily::sphere_gaussian}) {
        const SphericalProfile g(fam, sg(rng));
        const double c = cs(rng);
        const double fd = (g.gamma(c + h) - g.gamma(c - h)) / (2 * h);
        CHECK(std::abs(fd - g.d_gamma(c)) <= 1e-6 * std::max(std::abs(fd), 1e-3));
      }
    }
    const SpatialProfile p(SpatialFamily::cauchy, 1.0);
    CHECK(p.d_rho(0.7) == doctest::Approx((p.rho(0.7 + h) - p.rho(0.7 - h)) / (2 * h)).epsilon(1e-6));
  }

  TEST_CASE("spatial kernel matrices are positive semidefinite") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      Eigen::MatrixXd x(10, 2);
      for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
      for (auto fam : {SpatialFamily::gaussian, SpatialFamily::cauchy}) {
        const SpatialProfile p(fam, 0.8);
        Eigen::MatrixXd k(10, 10);
        for (int i = 0; i < 10; ++i) {
          for (int j = 0; j < 10; ++j) k(i, j) = p.rho((x.row(i) - x.row(j)).squaredNorm());
        }
        CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() >= -1e-10);
      }
    }
  }

  TEST_CASE("deformation kernel") {
    const DeformationKernel k(1.0);
    Eigen::Vector3d x(0.1, 0.2, 0.3), y(1.1, 0.2, 0.3);
    CHECK((k.eval(x, x) - Eigen::Matrix3d::Identity()).norm() == 0.0);
    CHECK((k.eval(x, y) - std::exp(-1.0) * Eigen::Matrix3d::Identity()).norm() < 1e-15);
    CHECK((k.eval(x, y) - k.eval(y, x).transpose()).norm() == 0.0);

    std::mt19937_64 rng(2);
    std::normal_distribution<double> n(0.0, 0.6);
    const DeformationKernel k2(0.7);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::Vector3d a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng));
      const auto g = k2.grad_x(a, b);
      for (int c = 0; c < 3; ++c) {
        Eigen::Vector3d e = Eigen::Vector3d::Zero();
        e(c) = 1e-6;
        const Eigen::MatrixXd fd = (k2.eval(a + e, b) - k2.eval(a - e, b)) / 2e-6;
        CHECK((fd - g[c]).norm() <= 1e-6 * std::max(fd.norm(), 1e-3));
      }
    }
  }

  TEST_CASE("family names") {
    CHECK(parse_spatial_family("cauchy") == SpatialFamily::cauchy);
    CHECK(to_string(SphericalFamily::sphere_gaussian) == "sphere_gaussian");
    CHECK_THROWS(parse_spherical_family("binet"));
  }
}
