#include <doctest.h>

#include "geomatch/error.hpp"
#include "geomatch/match.hpp"

using namespace geomatch;
using nlohmann::json;

namespace {

std::string rejected_key(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const MatchConfig c = config_from_json(json::object());
    CHECK(c.model == Model::lddmm);
    CHECK(c.solver == Solver::trajectory);
    CHECK(c.lambda == 100.0);
    CHECK(c.frame_times.size() == 5);
  }

  TEST_CASE("unknown and malformed keys are named") {
    CHECK(rejected_key(json::parse(R"({"lambada": 3})")) == "lambada");
    CHECK(rejected_key(json::parse(R"({"flow": {"sigmaa": 1}})")) == "flow.sigmaa");
    CHECK(rejected_key(json::parse(R"({"flow": {"time_steps": 2.5}})")) == "flow.time_steps");
    CHECK(rejected_key(json::parse(R"({"lambda": "big"})")) == "lambda");
    CHECK(rejected_key(json::parse(R"({"model": "spline"})")) == "model");
    CHECK(rejected_key(json::parse(R"({"hybrid": {"variant": "normal"}})")) == "hybrid.variant");
    CHECK(rejected_key(json::parse(R"({"lambda": -1})")) == "lambda");
    CHECK(rejected_key(json::parse(R"({"intrinsic": {"a1": 0, "a2": 1, "degree_theta": 2}})")) ==
          "intrinsic.degree_theta");
    CHECK(rejected_key(json::parse(R"({"output": {"frame_times": [0, 1.5]}})")) == "output.frame_times");
    CHECK(rejected_key(json::parse("[1, 2]")) == "<root>");
  }

  TEST_CASE("round trip") {
    MatchConfig c;
    c.model = Model::hybrid;
    c.solver = Solver::shooting;
    c.lambda = 12.5;
    c.spatial = SpatialFamily::cauchy;
    c.spatial_sigma = 0.3;
    c.spherical = SphericalFamily::sphere_gaussian;
    c.spherical_sigma = 0.7;
    c.intrinsic.coeffs = {0.5, 2.0, 0.1};
    c.intrinsic.num_ctrl_t = 7;
    c.flow.sigma = 0.9;
    c.flow.time_steps = 13;
    c.hybrid.weight = 3.0;
    c.hybrid.variant = StiffnessVariant::tangential;
    c.optim.max_iters = 17;
    c.output_dir = "elsewhere";
    c.frame_times = {0.0, 1.0};
    const json j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);
    CHECK(config_from_json(json::parse(j.dump())).hybrid.variant == StiffnessVariant::tangential);
  }

  TEST_CASE("overrides") {
    json j = json::object();
    apply_override(j, "flow.sigma=0.25");
    apply_override(j, "hybrid.variant=tangential");
    apply_override(j, "model=\"hybrid\"");
    const MatchConfig c = config_from_json(j);
    CHECK(c.flow.sigma == 0.25);
    CHECK(c.hybrid.variant == StiffnessVariant::tangential);
    CHECK(c.model == Model::hybrid);
    CHECK_THROWS_AS(apply_override(j, "no_equals"), ConfigError);
    CHECK_THROWS_AS(apply_override(j, "flow..sigma=1"), ConfigError);
    apply_override(j, "flow.bogus=1");
    CHECK(rejected_key(j) == "flow.bogus");
  }

  TEST_CASE("automatic widths") {
    const auto circle = make_polyline((Points(4, 2) << 0, 0, 2, 0, 2, 2, 0, 2).finished(), true);
    MatchConfig c;
    const MatchConfig r = c.resolved(circle, circle);
    CHECK(r.spatial_sigma == doctest::Approx(0.25 * bounding_box_diagonal(circle)));
    CHECK(r.flow.sigma == doctest::Approx(0.5 * bounding_box_diagonal(circle)));
    c.model = Model::hybrid;
    CHECK(c.resolved(circle, circle).flow.sigma == doctest::Approx(0.25 * bounding_box_diagonal(circle)));
    c.model = Model::intrinsic;
    CHECK(c.resolved(circle, circle).intrinsic.num_eval == 2 * c.intrinsic.num_ctrl_theta);
  }
}
