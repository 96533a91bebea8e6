#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "geomatch/corpus.hpp"
#include "geomatch/error.hpp"
#include "geomatch/shapes.hpp"
#include "helpers.hpp"

using namespace geomatch;
namespace fs = std::filesystem;

std::string testing::scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("geomatch_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

TEST_SUITE("shapes") {
  TEST_CASE("validation rejects malformed shapes") {
    Points v2(3, 2);
    v2 << 0, 0, 1, 0, 0, 1;
    Cells tri(1, 3);
    tri << 0, 1, 2;
    CHECK_THROWS_AS(SimplicialShape(ShapeKind::surface, v2, tri, false), InvalidShape);

    Cells seg(2, 2);
    seg << 0, 1, 1, 3;
    CHECK_THROWS_AS(SimplicialShape(ShapeKind::curve, v2, seg, false), InvalidShape);
    seg << 0, 1, 1, 1;
    CHECK_THROWS_AS(SimplicialShape(ShapeKind::curve, v2, seg, false), InvalidShape);

    // Closed curve where vertex 0 is a head twice.
    Cells bad(3, 2);
    bad << 0, 1, 0, 2, 2, 0;
    CHECK_THROWS_AS(SimplicialShape(ShapeKind::curve, v2, bad, true), InvalidShape);

    Points dup(2, 2);
    dup << 1, 1, 1, 1;
    CHECK_THROWS_AS(make_polyline(dup, false), DegenerateSimplex);
  }

  TEST_CASE("cell features of a unit segment and a right triangle") {
    const auto f = cell_features(testing::segment(0, 0, 1, 0));
    CHECK(f.barycenters(0, 0) == doctest::Approx(0.5));
    CHECK(f.barycenters(0, 1) == doctest::Approx(0.0));
    CHECK(f.orientations(0, 0) == doctest::Approx(1.0));
    CHECK(f.measures(0) == doctest::Approx(1.0));

    Points v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    Cells t(1, 3);
    t << 0, 1, 2;
    const auto g = cell_features(SimplicialShape(ShapeKind::surface, v, t, false));
    CHECK(g.barycenters(0, 0) == doctest::Approx(1.0 / 3));
    CHECK(g.barycenters(0, 1) == doctest::Approx(1.0 / 3));
    CHECK(g.orientations(0, 2) == doctest::Approx(1.0));
    CHECK(g.measures(0) == doctest::Approx(0.5));
  }

  TEST_CASE("cell features are rigidly equivariant") {
    std::mt19937_64 rng(1);
    for (const auto& s : {corpus::star(20), corpus::icosphere(1)}) {
      const int d = s.dim();
      const Eigen::MatrixXd r = testing::random_rotation(rng, d);
      const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(d, 0.3, -1.1);
      const auto f0 = cell_features(s), f1 = cell_features(rigid_transform(s, r, b));
      const Eigen::MatrixXd bary = (f0.barycenters * r.transpose()).rowwise() + b.transpose();
      CHECK((f1.barycenters - bary).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((f1.orientations - f0.orientations * r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((f1.measures - f0.measures).cwiseAbs().maxCoeff() < 1e-12);
      for (Eigen::Index i = 0; i < f1.orientations.rows(); ++i) CHECK(std::abs(f1.orientations.row(i).norm() - 1) < 1e-12);
    }
  }

  TEST_CASE("rigid transform") {
    const auto s = testing::segment(0, 0, 1, 0);
    CHECK(rigid_transform(s, Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()) == s);
    Eigen::Matrix2d r;
    r << 0, -1, 1, 0;
    const auto t = rigid_transform(s, r, Eigen::Vector2d::Zero());
    CHECK(t.vertices()(1, 0) == doctest::Approx(0.0));
    CHECK(t.vertices()(1, 1) == doctest::Approx(1.0));
    Eigen::Matrix2d refl;
    refl << 1, 0, 0, -1;
    CHECK_THROWS_AS(rigid_transform(s, refl, Eigen::Vector2d::Zero()), NotARotation);
    CHECK_THROWS_AS(rigid_transform(s, 2.0 * r, Eigen::Vector2d::Zero()), NotARotation);
  }

  TEST_CASE("subdivision preserves measure and orientation") {
    const auto sq = corpus::square(4);
    const auto sq2 = subdivide(sq);
    CHECK(sq2.num_simplices() == 8);
    CHECK(total_measure(sq2) == doctest::Approx(total_measure(sq)).epsilon(1e-12));
    CHECK(sq2.closed());

    Points v(3, 3);
    v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
    Cells t(1, 3);
    t << 0, 1, 2;
    const auto tri2 = subdivide(SimplicialShape(ShapeKind::surface, v, t, false));
    CHECK(tri2.num_simplices() == 4);
    CHECK(total_measure(tri2) == doctest::Approx(0.5).epsilon(1e-12));
    const auto f = cell_features(tri2);
    for (int i = 0; i < 4; ++i) CHECK(f.orientations(i, 2) == doctest::Approx(1.0));

    const auto sph = corpus::icosphere(1);
    CHECK(subdivide(sph).num_simplices() == 4 * sph.num_simplices());
    CHECK(total_measure(subdivide(sph)) > total_measure(sph) * 0.99);
  }

  TEST_CASE("curve and OBJ round trips") {
    const std::string dir = testing::scratch_dir("shapes_io");
    std::mt19937_64 rng(3);
    const auto c = corpus::limacon(17);
    const auto c2 = c.with_vertices(testing::jitter(c.vertices(), rng, 0.01));
    save_shape(c2, dir + "/a.curve");
    const auto back = load_shape(dir + "/a.curve");
    CHECK(back.num_vertices() == c2.num_vertices());
    CHECK((back.vertices() - c2.vertices()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(back.simplices() == c2.simplices());
    CHECK(back.closed());

    const auto s = corpus::torus_patch(6, 5);
    save_shape(s, dir + "/t.obj");
    const auto sb = load_shape(dir + "/t.obj");
    CHECK(sb.kind() == ShapeKind::surface);
    CHECK((sb.vertices() - s.vertices()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(sb.simplices() == s.simplices());
  }

  TEST_CASE("parsing small files and errors") {
    const std::string dir = testing::scratch_dir("shapes_parse");
    {
      std::ofstream out(dir + "/three.curve");
      out << "# open polyline\ncurve 2 3 2 0\n0 0\n1 0\n1 1\n0 1\n1 2\n";
    }
    const auto c = load_shape(dir + "/three.curve");
    CHECK(c.num_vertices() == 3);
    CHECK(c.num_simplices() == 2);
    CHECK_FALSE(c.closed());
    {
      std::ofstream out(dir + "/tri.obj");
      out << "o tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    }
    CHECK(load_shape(dir + "/tri.obj").num_simplices() == 1);
    {
      std::ofstream out(dir + "/slash.obj");
      out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1 2/2 3/3\n";
    }
    try {
      load_shape(dir + "/slash.obj");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
    }
    {
      std::ofstream out(dir + "/bad.curve");
      out << "curve 2 2 1 0\n0 0\n1 x\n0 1\n";
    }
    try {
      load_shape(dir + "/bad.curve");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(load_shape(dir + "/shape.ply"), UnsupportedFormat);
    CHECK_THROWS_AS(load_shape(dir + "/missing.curve"), ParseError);
  }
}
