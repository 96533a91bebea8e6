// geomatch: varifold distances and shape matching from the command line.
#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "geomatch/error.hpp"
#include "geomatch/match.hpp"
#include "geomatch/parallel.hpp"
#include "geomatch/run_output.hpp"
#include "geomatch/selftest.hpp"
#include "geomatch/varifold.hpp"

namespace gm = geomatch;
using nlohmann::json;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitMismatch = 3;
constexpr int kExitSolver = 4;

std::string sig12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Loads a shape; callers map a failure to exit code 2.
std::optional<gm::SimplicialShape> load(const std::string& path) {
  try {
    return gm::load_shape(path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return std::nullopt;
  }
}

struct DistArgs {
  std::string a, b;
  std::string spatial = "gaussian";
  double sigma = 1.0;
  std::string spherical = "linear";
  double spherical_sigma = 1.0;
};

int run_dist(const DistArgs& args) {
  gm::VarifoldKernel k;
  try {
    k = gm::VarifoldKernel{gm::SpatialProfile(gm::parse_spatial_family(args.spatial), args.sigma),
                           gm::SphericalProfile(gm::parse_spherical_family(args.spherical), args.spherical_sigma)};
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  const auto sa = load(args.a);
  const auto sb = sa ? load(args.b) : std::nullopt;
  if (!sb) return kExitParse;
  const gm::SimplicialShape& a = *sa;
  const gm::SimplicialShape& b = *sb;
  if (a.kind() != b.kind() || a.dim() != b.dim()) {
    std::cerr << "error: shapes differ in kind or dimension\n";
    return kExitMismatch;
  }
  const double d2 = gm::varifold_dist_sq(a, b, k);
  std::cout << "dist_sq=" << sig12(d2) << "\n" << "dist=" << sig12(std::sqrt(d2)) << "\n";
  return 0;
}

struct MatchArgs {
  std::string source, target, config, out, model, solver;
  std::vector<std::string> overrides;
};

int run_match(const MatchArgs& args) {
  json j = json::object();
  gm::MatchConfig cfg;
  try {
    if (!args.config.empty()) {
      std::ifstream in(args.config);
      if (!in) throw gm::ParseError(args.config, 0, "cannot open config");
      j = json::parse(in, nullptr, true, true);
    }
    if (!args.model.empty()) gm::apply_override(j, "model=\"" + args.model + "\"");
    if (!args.solver.empty()) gm::apply_override(j, "solver=\"" + args.solver + "\"");
    if (!args.out.empty()) gm::apply_override(j, "output.dir=" + json(args.out).dump());
    for (const auto& o : args.overrides) gm::apply_override(j, o);
    cfg = gm::config_from_json(j);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
  const auto src = load(args.source);
  const auto tgt = src ? load(args.target) : std::nullopt;
  if (!tgt) return kExitParse;
  const gm::SimplicialShape& source = *src;
  const gm::SimplicialShape& target = *tgt;
  if (source.kind() != target.kind() || source.dim() != target.dim()) {
    std::cerr << "error: source and target differ in kind or dimension\n";
    return kExitMismatch;
  }
  gm::MatchReport report;
  gm::MatchConfig effective;
  try {
    effective = cfg.resolved(source, target);
    report = gm::match(source, target, effective);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    gm::write_failure(cfg.output_dir, e.what());
    return kExitSolver;
  }
  try {
    gm::write_run(cfg.output_dir, report, effective, &target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    gm::write_failure(cfg.output_dir, e.what());
    return kExitSolver;
  }
  std::cout << "model=" << gm::to_string(report.model) << " solver=" << gm::to_string(report.solver)
            << " status=" << gm::optim::to_string(report.status) << " iterations=" << report.iterations << "\n"
            << "energy=" << sig12(report.energy) << " fidelity=" << sig12(report.fidelity)
            << " reduction=" << sig12(report.fidelity_reduction()) << "\n"
            << "output=" << cfg.output_dir << "\n";
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  return 0;
}

int run_selftest(const std::string& mutation) {
  std::vector<gm::CheckResult> results;
  try {
    results = gm::run_selftest({mutation});
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  int failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    failed += r.passed ? 0 : 1;
  }
  std::cout << (failed ? "selftest FAILED (" + std::to_string(failed) + " checks)" : "selftest passed") << "\n";
  return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Varifold distances and shape matching (intrinsic, LDDMM and hybrid metrics)"};
  app.require_subcommand(1);
  int threads = -1;
  app.add_option("--threads", threads, "Worker threads (0 = auto); overrides GEOMATCH_THREADS");

  DistArgs dist;
  auto* cmd_dist = app.add_subcommand("dist", "Squared varifold distance between two shapes");
  cmd_dist->add_option("a", dist.a, "First shape (.curve or .obj)")->required();
  cmd_dist->add_option("b", dist.b, "Second shape")->required();
  cmd_dist->add_option("--spatial", dist.spatial, "gaussian | cauchy")->capture_default_str();
  cmd_dist->add_option("--sigma", dist.sigma, "Spatial kernel width")->capture_default_str();
  cmd_dist->add_option("--spherical", dist.spherical, "linear | sphere_gaussian")->capture_default_str();
  cmd_dist->add_option("--spherical-sigma", dist.spherical_sigma, "Spherical kernel width")->capture_default_str();

  MatchArgs match;
  auto* cmd_match = app.add_subcommand("match", "Match a source shape onto a target");
  cmd_match->add_option("source", match.source, "Source shape")->required();
  cmd_match->add_option("target", match.target, "Target shape")->required();
  cmd_match->add_option("-c,--config", match.config, "JSON config file");
  cmd_match->add_option("-o,--out", match.out, "Output directory (overrides output.dir)");
  cmd_match->add_option("--model", match.model, "intrinsic | lddmm | hybrid");
  cmd_match->add_option("--solver", match.solver, "trajectory | shooting");
  cmd_match->add_option("-s,--set", match.overrides, "Override as section.key=value (repeatable)");

  std::string mutation;
  auto* cmd_self = app.add_subcommand("selftest", "Run the fast invariant suite");
  cmd_self->add_option("--mutate", mutation, "Inject a known fault (testing the suite itself)");

  CLI11_PARSE(app, argc, argv);

  gm::configure_threads_from_env();
  if (threads >= 0) gm::set_max_threads(threads);

  if (*cmd_dist) return run_dist(dist);
  if (*cmd_match) return run_match(match);
  if (*cmd_self) return run_selftest(mutation);
  return 1;
}
