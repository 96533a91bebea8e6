#include <cmath>
#include <set>

#include "geomatch/error.hpp"
#include "geomatch/hybrid.hpp"
#include "geomatch/intrinsic.hpp"
#include "geomatch/lddmm.hpp"
#include "geomatch/match.hpp"

namespace geomatch {

using nlohmann::json;

std::string to_string(Model model) {
  switch (model) {
    case Model::intrinsic:
      return "intrinsic";
    case Model::lddmm:
      return "lddmm";
    case Model::hybrid:
      return "hybrid";
  }
  return "unknown";
}

std::string to_string(Solver solver) {
  return solver == Solver::shooting ? "shooting" : "trajectory";
}

std::string to_string(StiffnessVariant variant) {
  return variant == StiffnessVariant::tangential ? "tangential" : "full";
}

void SobolevCoeffs::validate() const {
  if (!(a0 >= 0.0)) throw ConfigError("intrinsic.a0", "must be >= 0");
  if (!(a1 >= 0.0)) throw ConfigError("intrinsic.a1", "must be >= 0");
  if (!(a2 >= 0.0)) throw ConfigError("intrinsic.a2", "must be >= 0");
  if (!(a0 + a1 + a2 > 0.0)) throw ConfigError("intrinsic.a0", "a0 + a1 + a2 must be positive");
}

void MatchConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be positive");
  if (!(spatial_sigma >= 0.0)) throw ConfigError("varifold.spatial_sigma", "must be >= 0 (0 = auto)");
  if (!(spherical_sigma > 0.0)) throw ConfigError("varifold.spherical_sigma", "must be positive");

  const IntrinsicOptions& io = intrinsic;
  io.coeffs.validate();
  if (io.degree_t < 1) throw ConfigError("intrinsic.degree_t", "must be >= 1");
  if (io.degree_theta < 2) throw ConfigError("intrinsic.degree_theta", "must be >= 2");
  if (io.degree_theta <= io.coeffs.order()) {
    throw ConfigError("intrinsic.degree_theta", "must exceed the metric order");
  }
  if (io.num_ctrl_t < io.degree_t + 1) throw ConfigError("intrinsic.num_ctrl_t", "must be > degree_t");
  if (io.num_ctrl_theta < io.degree_theta + 1) {
    throw ConfigError("intrinsic.num_ctrl_theta", "must be > degree_theta");
  }
  if (io.quad_t < 1) throw ConfigError("intrinsic.quad_t", "must be >= 1");
  if (io.quad_theta < 1) throw ConfigError("intrinsic.quad_theta", "must be >= 1");
  if (!(io.fit_tol > 0.0)) throw ConfigError("intrinsic.fit_tol", "must be positive");
  if (io.num_eval != 0 && io.num_eval < 3) throw ConfigError("intrinsic.num_eval", "must be 0 or >= 3");

  if (!(flow.sigma >= 0.0)) throw ConfigError("flow.sigma", "must be >= 0 (0 = auto)");
  if (flow.time_steps < 1) throw ConfigError("flow.time_steps", "must be >= 1");
  if (flow.shoot_steps < 1) throw ConfigError("flow.shoot_steps", "must be >= 1");
  if (!(hybrid.weight >= 0.0)) throw ConfigError("hybrid.weight", "must be >= 0");
  optim.validate();
  if (output_dir.empty()) throw ConfigError("output.dir", "must not be empty");
  for (double t : frame_times) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("output.frame_times", "times must lie in [0, 1]");
  }
}

MatchConfig MatchConfig::resolved(const SimplicialShape& source, const SimplicialShape& target) const {
  validate();
  MatchConfig out = *this;
  if (out.spatial_sigma == 0.0) out.spatial_sigma = 0.25 * bounding_box_diagonal(target);
  // Hybrid runs default to a narrower kernel; the intrinsic term carries the regularity.
  if (out.flow.sigma == 0.0) {
    out.flow.sigma = (model == Model::hybrid ? 0.25 : 0.5) * bounding_box_diagonal(source);
  }
  if (out.intrinsic.num_eval == 0) out.intrinsic.num_eval = 2 * out.intrinsic.num_ctrl_theta;
  if (!(out.spatial_sigma > 0.0) || !(out.flow.sigma > 0.0)) {
    throw ConfigError(out.spatial_sigma > 0.0 ? "flow.sigma" : "varifold.spatial_sigma",
                      "automatic width is zero for a point-like shape");
  }
  return out;
}

VarifoldKernel MatchConfig::varifold_kernel() const {
  if (!(spatial_sigma > 0.0)) throw ConfigError("varifold.spatial_sigma", "unresolved automatic width");
  return VarifoldKernel{SpatialProfile(spatial, spatial_sigma), SphericalProfile(spherical, spherical_sigma)};
}

namespace {

// Reads one JSON object and rejects keys nobody asked for.
class Reader {
 public:
  Reader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  std::string key(const std::string& name) const { return prefix_.empty() ? name : prefix_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& name, double& out) {
    if (const json* v = find(name)) {
      if (!v->is_number()) throw ConfigError(key(name), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& name, int& out) {
    if (const json* v = find(name)) {
      if (!v->is_number_integer()) throw ConfigError(key(name), "expected an integer");
      out = v->get<int>();
    }
  }

  void string(const std::string& name, std::string& out) {
    if (const json* v = find(name)) {
      if (!v->is_string()) throw ConfigError(key(name), "expected a string");
      out = v->get<std::string>();
    }
  }

  template <class F>
  void section(const std::string& name, F&& body) {
    if (const json* v = find(name)) {
      Reader sub(*v, key(name));
      body(sub);
      sub.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

template <class E, class Parse>
void enum_field(Reader& r, const std::string& name, E& out, Parse parse) {
  std::string s;
  if (!r.find(name)) return;
  r.string(name, s);
  try {
    out = parse(s);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(r.key(name), "unknown value '" + s + "'");
  }
}

Model parse_model(const std::string& s) {
  if (s == "intrinsic") return Model::intrinsic;
  if (s == "lddmm") return Model::lddmm;
  if (s == "hybrid") return Model::hybrid;
  throw Error("bad model");
}

Solver parse_solver(const std::string& s) {
  if (s == "trajectory") return Solver::trajectory;
  if (s == "shooting") return Solver::shooting;
  throw Error("bad solver");
}

StiffnessVariant parse_variant(const std::string& s) {
  if (s == "full") return StiffnessVariant::full;
  if (s == "tangential") return StiffnessVariant::tangential;
  throw Error("bad variant");
}

}  // namespace

MatchConfig config_from_json(const json& j) {
  MatchConfig c;
  Reader root(j, "");
  enum_field(root, "model", c.model, parse_model);
  enum_field(root, "solver", c.solver, parse_solver);
  root.number("lambda", c.lambda);
  root.section("varifold", [&](Reader& r) {
    enum_field(r, "spatial", c.spatial, parse_spatial_family);
    r.number("spatial_sigma", c.spatial_sigma);
    enum_field(r, "spherical", c.spherical, parse_spherical_family);
    r.number("spherical_sigma", c.spherical_sigma);
  });
  root.section("intrinsic", [&](Reader& r) {
    IntrinsicOptions& io = c.intrinsic;
    r.number("a0", io.coeffs.a0);
    r.number("a1", io.coeffs.a1);
    r.number("a2", io.coeffs.a2);
    r.integer("num_ctrl_t", io.num_ctrl_t);
    r.integer("num_ctrl_theta", io.num_ctrl_theta);
    r.integer("degree_t", io.degree_t);
    r.integer("degree_theta", io.degree_theta);
    r.integer("quad_t", io.quad_t);
    r.integer("quad_theta", io.quad_theta);
    r.number("fit_tol", io.fit_tol);
    r.integer("num_eval", io.num_eval);
  });
  root.section("flow", [&](Reader& r) {
    r.number("sigma", c.flow.sigma);
    r.integer("time_steps", c.flow.time_steps);
    r.integer("shoot_steps", c.flow.shoot_steps);
  });
  root.section("hybrid", [&](Reader& r) {
    r.number("weight", c.hybrid.weight);
    enum_field(r, "variant", c.hybrid.variant, parse_variant);
  });
  root.section("optim", [&](Reader& r) {
    r.integer("memory", c.optim.memory);
    r.integer("max_iters", c.optim.max_iters);
    r.number("grad_tol", c.optim.grad_tol);
    r.number("c1", c.optim.c1);
    r.number("c2", c.optim.c2);
    r.integer("max_line_search", c.optim.max_line_search);
  });
  root.section("output", [&](Reader& r) {
    r.string("dir", c.output_dir);
    if (const json* v = r.find("frame_times")) {
      if (!v->is_array()) throw ConfigError("output.frame_times", "expected an array of numbers");
      c.frame_times.clear();
      for (const auto& t : *v) {
        if (!t.is_number()) throw ConfigError("output.frame_times", "expected an array of numbers");
        c.frame_times.push_back(t.get<double>());
      }
    }
  });
  root.finish();
  c.validate();
  return c;
}

json config_to_json(const MatchConfig& c) {
  const IntrinsicOptions& io = c.intrinsic;
  return json{
      {"model", to_string(c.model)},
      {"solver", to_string(c.solver)},
      {"lambda", c.lambda},
      {"varifold",
       {{"spatial", to_string(c.spatial)},
        {"spatial_sigma", c.spatial_sigma},
        {"spherical", to_string(c.spherical)},
        {"spherical_sigma", c.spherical_sigma}}},
      {"intrinsic",
       {{"a0", io.coeffs.a0},
        {"a1", io.coeffs.a1},
        {"a2", io.coeffs.a2},
        {"num_ctrl_t", io.num_ctrl_t},
        {"num_ctrl_theta", io.num_ctrl_theta},
        {"degree_t", io.degree_t},
        {"degree_theta", io.degree_theta},
        {"quad_t", io.quad_t},
        {"quad_theta", io.quad_theta},
        {"fit_tol", io.fit_tol},
        {"num_eval", io.num_eval}}},
      {"flow", {{"sigma", c.flow.sigma}, {"time_steps", c.flow.time_steps}, {"shoot_steps", c.flow.shoot_steps}}},
      {"hybrid", {{"weight", c.hybrid.weight}, {"variant", to_string(c.hybrid.variant)}}},
      {"optim",
       {{"memory", c.optim.memory},
        {"max_iters", c.optim.max_iters},
        {"grad_tol", c.optim.grad_tol},
        {"c1", c.optim.c1},
        {"c2", c.optim.c2},
        {"max_line_search", c.optim.max_line_search}}},
      {"output", {{"dir", c.output_dir}, {"frame_times", c.frame_times}}},
  };
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like section.key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(path, "empty key component");
    if (!node->is_object()) throw ConfigError(path, "parent is not an object");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

double MatchReport::fidelity_reduction() const {
  if (!(initial_fidelity > 0.0)) return fidelity <= 0.0 ? 1.0 : 0.0;
  return 1.0 - fidelity / initial_fidelity;
}

MatchReport match(const SimplicialShape& source, const SimplicialShape& target, const MatchConfig& cfg) {
  cfg.validate();
  if (source.kind() != target.kind()) throw KindMismatch("source and target kinds differ");
  if (source.dim() != target.dim()) throw DimensionMismatch("source and target dimensions differ");
  switch (cfg.model) {
    case Model::intrinsic:
      return match_intrinsic(source, target, cfg);
    case Model::lddmm:
      return match_lddmm(source, target, cfg);
    case Model::hybrid:
      return match_hybrid(source, target, cfg);
  }
  throw Error("unknown model");
}

double max_log_edge_change(const std::vector<SimplicialShape>& path) {
  if (path.empty()) return 0.0;
  const SimplicialShape& first = path.front();
  const Cells& cells = first.simplices();
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < cells.rows(); ++i) {
    for (int a = 0; a < cells.cols(); ++a) {
      const int b = (a + 1) % static_cast<int>(cells.cols());
      if (cells.cols() == 2 && a == 1) break;
      edges.emplace_back(cells(i, a), cells(i, b));
    }
  }
  auto len = [](const SimplicialShape& s, const std::pair<int, int>& e) {
    return (s.vertices().row(e.first) - s.vertices().row(e.second)).norm();
  };
  double worst = 0.0;
  for (const auto& e : edges) {
    const double l0 = len(first, e);
    for (const auto& s : path) {
      if (s.num_vertices() != first.num_vertices()) throw DimensionMismatch("path shapes differ in size");
      worst = std::max(worst, std::abs(std::log(len(s, e) / l0)));
    }
  }
  return worst;
}

}  // namespace geomatch
