#include "geomatch/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "geomatch/error.hpp"

namespace geomatch::optim {

void OptimOptions::validate() const {
  if (memory < 1) throw ConfigError("optim.memory", "must be >= 1");
  if (max_iters < 0) throw ConfigError("optim.max_iters", "must be >= 0");
  if (!(grad_tol >= 0.0)) throw ConfigError("optim.grad_tol", "must be >= 0");
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) throw ConfigError("optim.c1", "need 0 < c1 < c2 < 1");
  if (max_line_search < 1) throw ConfigError("optim.max_line_search", "must be >= 1");
}

std::string to_string(Status status) {
  switch (status) {
    case Status::converged:
      return "converged";
    case Status::max_iters:
      return "max_iters";
    case Status::line_search_failed:
      return "line_search_failed";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Sample {
  double alpha = 0.0;
  double f = kInf;
  double slope = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

class LineSearch {
 public:
  LineSearch(const Objective& objective, const OptimOptions& opts, const Eigen::VectorXd& x,
             const Eigen::VectorXd& dir, double f0, double slope0, int& evaluations)
      : objective_(objective),
        opts_(opts),
        x_(x),
        dir_(dir),
        f0_(f0),
        slope0_(slope0),
        evaluations_(evaluations) {}

  /// Returns true and fills `out` when a strong-Wolfe point is found.
  bool run(double alpha_init, Sample& out) {
    Sample prev{0.0, f0_, slope0_, {}, {}};
    double alpha = alpha_init;
    for (int i = 0; i < opts_.max_line_search; ++i) {
      Sample cur = evaluate(alpha);
      if (!armijo(cur) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur, out);
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Sample evaluate(double alpha) {
    Sample s;
    s.alpha = alpha;
    s.x = x_ + alpha * dir_;
    s.g.resize(x_.size());
    ++evaluations_;
    ++trials_;
    try {
      s.f = objective_(s.x, s.g);
    } catch (const Error&) {
      s.f = kInf;
    }
    if (!std::isfinite(s.f) || !s.g.allFinite()) {
      s.f = kInf;
      s.slope = 0.0;
    } else {
      s.slope = s.g.dot(dir_);
    }
    return s;
  }

  bool armijo(const Sample& s) const {
    return std::isfinite(s.f) && s.f <= f0_ + opts_.c1 * s.alpha * slope0_;
  }
  bool curvature(const Sample& s) const {
    return std::abs(s.slope) <= -opts_.c2 * slope0_;
  }

  double interpolate(const Sample& lo, const Sample& hi) const {
    const double a = lo.alpha, b = hi.alpha;
    const double lo_bound = std::min(a, b) + 0.1 * std::abs(b - a);
    const double hi_bound = std::max(a, b) - 0.1 * std::abs(b - a);
    if (!std::isfinite(hi.f)) return 0.5 * (a + b);
    // Cubic through (a, f_a, f'_a), (b, f_b, f'_b).
    const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
    const double disc = d1 * d1 - lo.slope * hi.slope;
    if (disc < 0.0) return 0.5 * (a + b);
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = hi.slope - lo.slope + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    const double t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    if (!std::isfinite(t)) return 0.5 * (a + b);
    return std::clamp(t, lo_bound, hi_bound);
  }

  bool zoom(Sample lo, Sample hi, Sample& out) {
    while (trials_ < opts_.max_line_search) {
      const double alpha = interpolate(lo, hi);
      if (std::abs(hi.alpha - lo.alpha) <= 1e-16 * std::max(1.0, std::abs(lo.alpha))) return false;
      Sample cur = evaluate(alpha);
      if (!armijo(cur) || cur.f >= lo.f) {
        hi = std::move(cur);
      } else {
        if (curvature(cur)) {
          out = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return false;
  }

  const Objective& objective_;
  const OptimOptions& opts_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  int& evaluations_;
  int trials_ = 0;
};

}  // namespace

Result minimize(const Objective& objective, Eigen::VectorXd x0, const OptimOptions& opts,
                const IterationCallback& on_iterate) {
  opts.validate();
  Result r;
  r.x = std::move(x0);
  r.grad.resize(r.x.size());
  r.f = objective(r.x, r.grad);
  r.evaluations = 1;
  if (!std::isfinite(r.f) || !r.grad.allFinite()) {
    throw NonFiniteObjective("objective is not finite at the starting point");
  }
  auto grad_inf = [](const Eigen::VectorXd& g) { return g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0; };
  r.history.push_back({0, r.f, grad_inf(r.grad)});
  if (on_iterate) on_iterate(0, r.x, r.f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  for (int k = 0;; ++k) {
    if (grad_inf(r.grad) <= opts.grad_tol * (1.0 + std::abs(r.f))) {
      r.status = Status::converged;
      return r;
    }
    if (k >= opts.max_iters) {
      r.status = Status::max_iters;
      return r;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = r.grad;
    const int m = static_cast<int>(s_hist.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double slope = r.grad.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -r.grad;
      slope = -r.grad.squaredNorm();
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / dir.norm()) : 1.0;

    Sample next;
    LineSearch search(objective, opts, r.x, dir, r.f, slope, r.evaluations);
    if (!search.run(alpha0, next)) {
      r.status = Status::line_search_failed;
      return r;
    }
    // Both Wolfe conditions hold on every accepted step.
    if (!(next.f <= r.f + opts.c1 * next.alpha * slope) ||
        !(std::abs(next.slope) <= -opts.c2 * slope)) {
      r.status = Status::line_search_failed;
      return r;
    }

    Eigen::VectorXd s = next.x - r.x;
    Eigen::VectorXd y = next.g - r.grad;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
    r.x = std::move(next.x);
    r.grad = std::move(next.g);
    r.f = next.f;
    r.iterations = k + 1;
    r.history.push_back({r.iterations, r.f, grad_inf(r.grad)});
    if (on_iterate) on_iterate(r.iterations, r.x, r.f);
  }
}

}  // namespace geomatch::optim
