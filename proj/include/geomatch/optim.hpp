#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace geomatch::optim {

struct OptimOptions {
  int memory = 10;
  int max_iters = 500;
  /// Stop when ||g||_inf <= grad_tol * (1 + |f|).
  double grad_tol = 1e-6;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;

  void validate() const;
};

enum class Status { converged, max_iters, line_search_failed };

std::string to_string(Status status);

struct HistoryEntry {
  int iter;
  double f;
  double grad_inf;
};

struct Result {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  Status status = Status::max_iters;
  int iterations = 0;
  int evaluations = 0;
  std::vector<HistoryEntry> history;
};

/// Returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;
/// Called at the starting point (iter 0) and after every accepted step.
using IterationCallback = std::function<void(int iter, const Eigen::VectorXd& x, double f)>;

/// L-BFGS with a strong-Wolfe line search.
///
/// Trial points where the objective throws a geomatch::Error or returns a
/// non-finite value are treated as overshooting and the step is shortened.
/// Throws NonFiniteObjective if f or its gradient is not finite at x0.
Result minimize(const Objective& objective, Eigen::VectorXd x0, const OptimOptions& opts = {},
                const IterationCallback& on_iterate = {});

}  // namespace geomatch::optim
