#pragma once

#include <Eigen/Dense>
#include <json.hpp>
#include <limits>
#include <string>
#include <vector>

#include "geomatch/kernels.hpp"
#include "geomatch/optim.hpp"
#include "geomatch/shapes.hpp"
#include "geomatch/varifold.hpp"

namespace geomatch {

enum class Model { intrinsic, lddmm, hybrid };
enum class Solver { trajectory, shooting };
enum class StiffnessVariant { full, tangential };

std::string to_string(Model model);
std::string to_string(Solver solver);
std::string to_string(StiffnessVariant variant);

/// Weights of the L^2, first and second arc-length derivative terms.
struct SobolevCoeffs {
  double a0 = 1.0;
  double a1 = 1.0;
  double a2 = 0.0;

  void validate() const;
  /// Highest order with a positive weight.
  int order() const { return a2 > 0.0 ? 2 : (a1 > 0.0 ? 1 : 0); }
};

struct IntrinsicOptions {
  SobolevCoeffs coeffs;
  int num_ctrl_t = 10;
  int num_ctrl_theta = 40;
  int degree_t = 3;
  int degree_theta = 4;
  int quad_t = 3;
  int quad_theta = 5;
  /// Relative RMS residual (w.r.t. the bounding-box diagonal) allowed for the source fit.
  double fit_tol = 0.05;
  /// Samples of c(1, .) fed to the fidelity; 0 selects 2 * num_ctrl_theta.
  int num_eval = 0;
};

struct FlowOptions {
  /// Deformation kernel width; 0 selects 0.5 (LDDMM) or 0.25 (hybrid) x the source bounding-box diagonal.
  double sigma = 0.0;
  /// Control intervals in trajectory mode.
  int time_steps = 10;
  /// RK4 steps in shooting mode.
  int shoot_steps = 50;
};

struct HybridOptions {
  double weight = 1.0;
  StiffnessVariant variant = StiffnessVariant::full;
};

/// Complete description of a matching run.
struct MatchConfig {
  Model model = Model::lddmm;
  Solver solver = Solver::trajectory;
  double lambda = 100.0;

  SpatialFamily spatial = SpatialFamily::gaussian;
  /// 0 selects 0.25 x the target bounding-box diagonal.
  double spatial_sigma = 0.0;
  SphericalFamily spherical = SphericalFamily::linear;
  double spherical_sigma = 1.0;

  IntrinsicOptions intrinsic;
  FlowOptions flow;
  HybridOptions hybrid;
  optim::OptimOptions optim;

  std::string output_dir = "run";
  std::vector<double> frame_times = {0.0, 0.25, 0.5, 0.75, 1.0};

  void validate() const;

  /// Copy with every automatic (0) parameter replaced by its value for this pair.
  MatchConfig resolved(const SimplicialShape& source, const SimplicialShape& target) const;

  VarifoldKernel varifold_kernel() const;
};

/// Strict parse: unknown keys and invalid values raise ConfigError naming the key.
MatchConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const MatchConfig& cfg);
/// Applies a "section.key=value" override (value parsed as JSON, else as a string).
void apply_override(nlohmann::json& j, const std::string& assignment);

struct EnergyRow {
  int iter = 0;
  double energy = 0.0;
  double fidelity = 0.0;
  double total = 0.0;
  double outer = std::numeric_limits<double>::quiet_NaN();
  double intrinsic = std::numeric_limits<double>::quiet_NaN();
};

struct Frame {
  double t;
  SimplicialShape shape;
};

struct MatchReport {
  Model model = Model::lddmm;
  Solver solver = Solver::trajectory;
  optim::Status status = optim::Status::max_iters;
  int iterations = 0;
  int evaluations = 0;
  /// Path energy (running cost) at the optimum.
  double energy = 0.0;
  /// Unweighted squared varifold distance of the endpoint to the target.
  double fidelity = 0.0;
  double initial_fidelity = 0.0;
  /// energy + lambda * fidelity.
  double total = 0.0;
  std::vector<EnergyRow> history;
  bool split_energy = false;

  /// Shapes at every time sample of the discretization.
  Eigen::VectorXd path_times;
  std::vector<SimplicialShape> path;
  /// Shapes at the configured frame times.
  std::vector<Frame> frames;

  /// Controls (trajectory mode, one row per interval) or the single row p0 (shooting).
  Eigen::MatrixXd momentum;

  std::vector<std::string> warnings;
  /// Model-specific diagnostics (fit residual, energy split per time step, ...).
  nlohmann::json extras = nlohmann::json::object();
  double seconds = 0.0;

  double fidelity_reduction() const;
};

/// Runs the matcher selected by cfg.model.
MatchReport match(const SimplicialShape& source, const SimplicialShape& target,
                  const MatchConfig& cfg);

/// Maximum over edges and time samples of |log(len_e(t) / len_e(0))|.
double max_log_edge_change(const std::vector<SimplicialShape>& path);

}  // namespace geomatch
