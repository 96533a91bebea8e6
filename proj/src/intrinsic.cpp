#include "geomatch/intrinsic.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "geomatch/error.hpp"
#include "geomatch/varifold.hpp"

namespace geomatch {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kImmersionFloor = 1e-12;
}  // namespace

SplinePath::SplinePath(int num_t, int num_theta, int degree_t, int degree_theta, bool closed)
    : basis_t_(BSplineBasis::clamped(num_t, degree_t, 0.0, 1.0)),
      basis_theta_(closed ? BSplineBasis::periodic(num_theta, degree_theta, 0.0, kTwoPi)
                          : BSplineBasis::clamped(num_theta, degree_theta, 0.0, kTwoPi)),
      closed_(closed),
      ctrl_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_t) * num_theta, 2)) {}

void SplinePath::set_row(int i, const Eigen::MatrixXd& row_ctrl) {
  ctrl_.middleRows(static_cast<Eigen::Index>(i) * num_theta(), num_theta()) = row_ctrl;
}

Eigen::MatrixXd SplinePath::row(int i) const {
  return ctrl_.middleRows(static_cast<Eigen::Index>(i) * num_theta(), num_theta());
}

Eigen::Vector2d SplinePath::eval(double t, double theta, int dt, int dtheta) const {
  if (dt < 0 || dtheta < 0) throw Error("negative derivative order");
  if (dt > basis_t_.degree() || dtheta > basis_theta_.degree()) {
    throw OrderTooHigh("derivative order (" + std::to_string(dt) + ", " + std::to_string(dtheta) +
                       ") exceeds the spline degrees (" + std::to_string(basis_t_.degree()) +
                       ", " + std::to_string(basis_theta_.degree()) + ")");
  }
  const auto bt = basis_t_.evaluate(t, dt);
  const auto bth = basis_theta_.evaluate(theta, dtheta);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int a = 0; a <= basis_t_.degree(); ++a) {
    const int i = basis_t_.ctrl_index(bt.first + a);
    for (int b = 0; b <= basis_theta_.degree(); ++b) {
      const int j = basis_theta_.ctrl_index(bth.first + b);
      out += bt.values(dt, a) * bth.values(dtheta, b) *
             ctrl_.row(static_cast<Eigen::Index>(i) * num_theta() + j).transpose();
    }
  }
  return out;
}

std::vector<double> SplinePath::sample_params(int count) const {
  std::vector<double> th(count);
  for (int k = 0; k < count; ++k) {
    th[k] = closed_ ? kTwoPi * k / count : kTwoPi * k / std::max(1, count - 1);
  }
  return th;
}

SimplicialShape SplinePath::sample(double t, int count) const {
  const auto bt = basis_t_.evaluate(t, 0);
  Eigen::MatrixXd curve_ctrl = Eigen::MatrixXd::Zero(num_theta(), 2);
  for (int a = 0; a <= basis_t_.degree(); ++a) {
    curve_ctrl += bt.values(0, a) * row(basis_t_.ctrl_index(bt.first + a));
  }
  const auto params = sample_params(count);
  Points pts(count, 2);
  for (int k = 0; k < count; ++k) {
    pts.row(k) = basis_theta_.dense_row(params[k]) * curve_ctrl;
  }
  return make_polyline(std::move(pts), closed_);
}

namespace {

struct NodeTable {
  std::vector<double> params;
  std::vector<double> weights;
  std::vector<BSplineBasis::Eval> evals;
};

NodeTable quadrature_nodes(const BSplineBasis& basis, int points, int derivs) {
  std::vector<double> gx, gw;
  gauss_legendre(points, gx, gw);
  const auto bp = basis.breakpoints();
  NodeTable table;
  for (std::size_t s = 0; s + 1 < bp.size(); ++s) {
    const double a = bp[s], b = bp[s + 1];
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (int k = 0; k < points; ++k) {
      const double u = mid + half * gx[k];
      table.params.push_back(u);
      table.weights.push_back(half * gw[k]);
      table.evals.push_back(basis.evaluate(u, derivs));
    }
  }
  return table;
}

}  // namespace

double path_energy(const SplinePath& path, const SobolevCoeffs& coeffs, const QuadratureRule& quad,
                   Eigen::MatrixXd* grad) {
  coeffs.validate();
  const int order = coeffs.order();
  const auto& bt = path.basis_t();
  const auto& bth = path.basis_theta();
  if (bth.degree() <= order || bth.degree() < 2) {
    throw OrderTooHigh("spline degree in theta must exceed the metric order and be >= 2");
  }
  const int nth = path.num_theta();
  const int pt = bt.degree(), pth = bth.degree();
  const Eigen::MatrixXd& ctrl = path.ctrl();
  const double a0 = coeffs.a0, a1 = coeffs.a1, a2 = coeffs.a2;

  const NodeTable tnodes = quadrature_nodes(bt, quad.points_t, 1);
  const NodeTable snodes = quadrature_nodes(bth, quad.points_theta, 2);

  if (grad) *grad = Eigen::MatrixXd::Zero(ctrl.rows(), 2);
  double energy = 0.0;
  Eigen::MatrixXd r0(nth, 2), r1(nth, 2), g0(nth, 2), g1(nth, 2);
  for (std::size_t it = 0; it < tnodes.params.size(); ++it) {
    const auto& et = tnodes.evals[it];
    r0.setZero();
    r1.setZero();
    for (int a = 0; a <= pt; ++a) {
      const auto rows = ctrl.middleRows(static_cast<Eigen::Index>(bt.ctrl_index(et.first + a)) * nth, nth);
      r0 += et.values(0, a) * rows;
      r1 += et.values(1, a) * rows;
    }
    g0.setZero();
    g1.setZero();
    double row_energy = 0.0;
    for (std::size_t is = 0; is < snodes.params.size(); ++is) {
      const auto& es = snodes.evals[is];
      Eigen::Vector2d ct = Eigen::Vector2d::Zero(), ctp = ct, ctpp = ct, cp = ct, cpp = ct;
      for (int b = 0; b <= pth; ++b) {
        const int j = bth.ctrl_index(es.first + b);
        const Eigen::Vector2d p0 = r0.row(j).transpose(), p1 = r1.row(j).transpose();
        cp += es.values(1, b) * p0;
        cpp += es.values(2, b) * p0;
        ct += es.values(0, b) * p1;
        ctp += es.values(1, b) * p1;
        ctpp += es.values(2, b) * p1;
      }
      const double m = cp.squaredNorm();
      const double len = std::sqrt(m);
      if (!(len > kImmersionFloor)) throw NotImmersed(tnodes.params[it], snodes.params[is], len);
      const double g = cp.dot(cpp);
      const Eigen::Vector2d dss = ctpp / m - ctp * (g / (m * m));
      const double w = tnodes.weights[it] * snodes.weights[is];
      row_energy += w * (a0 * ct.squaredNorm() * len + a1 * ctp.squaredNorm() / len +
                         a2 * dss.squaredNorm() * len);
      if (!grad) continue;

      Eigen::Vector2d d_ct = 2.0 * a0 * len * ct;
      Eigen::Vector2d d_cp = (a0 * ct.squaredNorm() / len) * cp;
      Eigen::Vector2d d_ctp = (2.0 * a1 / len) * ctp;
      d_cp -= (a1 * ctp.squaredNorm() / (m * len)) * cp;
      Eigen::Vector2d d_ctpp = Eigen::Vector2d::Zero();
      Eigen::Vector2d d_cpp = Eigen::Vector2d::Zero();
      if (a2 != 0.0) {
        d_ctpp = (2.0 * a2 * len / m) * dss;
        d_ctp -= (2.0 * a2 * len * g / (m * m)) * dss;
        const double d_g = -2.0 * a2 * len * dss.dot(ctp) / (m * m);
        const double d_m = a2 * (2.0 * len * dss.dot(-ctpp / (m * m) + ctp * (2.0 * g / (m * m * m))) +
                                 dss.squaredNorm() / (2.0 * len));
        d_cp += d_g * cpp + 2.0 * d_m * cp;
        d_cpp += d_g * cp;
      }
      for (int b = 0; b <= pth; ++b) {
        const int j = bth.ctrl_index(es.first + b);
        g0.row(j) += w * (es.values(1, b) * d_cp + es.values(2, b) * d_cpp).transpose();
        g1.row(j) += w * (es.values(0, b) * d_ct + es.values(1, b) * d_ctp + es.values(2, b) * d_ctpp)
                             .transpose();
      }
    }
    energy += row_energy;
    if (grad) {
      for (int a = 0; a <= pt; ++a) {
        grad->middleRows(static_cast<Eigen::Index>(bt.ctrl_index(et.first + a)) * nth, nth) +=
            et.values(0, a) * g0 + et.values(1, a) * g1;
      }
    }
  }
  return energy;
}

Points ordered_polyline(const SimplicialShape& curve) {
  if (curve.kind() != ShapeKind::curve) throw KindMismatch("expected a curve");
  const Cells& s = curve.simplices();
  const int nv = curve.num_vertices();
  std::vector<int> next(nv, -1), indeg(nv, 0);
  for (int i = 0; i < s.rows(); ++i) {
    if (next[s(i, 0)] != -1) throw InvalidShape("curve branches at vertex " + std::to_string(s(i, 0)));
    next[s(i, 0)] = s(i, 1);
    ++indeg[s(i, 1)];
  }
  int start = s(0, 0);
  if (!curve.closed()) {
    start = -1;
    for (int v = 0; v < nv; ++v) {
      if (indeg[v] == 0 && next[v] != -1) {
        if (start != -1) throw InvalidShape("open curve has several components");
        start = v;
      }
    }
    if (start == -1) throw InvalidShape("open curve has no start vertex");
  }
  std::vector<int> order;
  int v = start;
  do {
    order.push_back(v);
    v = next[v];
  } while (v != -1 && v != start && static_cast<int>(order.size()) <= nv);
  const int expected = curve.closed() ? static_cast<int>(s.rows()) : static_cast<int>(s.rows()) + 1;
  if (static_cast<int>(order.size()) != expected) {
    throw InvalidShape("curve is not a single connected polyline");
  }
  Points out(static_cast<int>(order.size()), curve.dim());
  for (std::size_t k = 0; k < order.size(); ++k) out.row(static_cast<int>(k)) = curve.vertices().row(order[k]);
  return out;
}

SplineFit fit_spline_curve(const SimplicialShape& curve, const BSplineBasis& basis) {
  if (curve.dim() != 2) throw DimensionMismatch("spline paths hold planar curves only");
  const Points poly = ordered_polyline(curve);
  const bool closed = curve.closed();
  const int nv = static_cast<int>(poly.rows());
  const int nseg = closed ? nv : nv - 1;
  const int wanted = 2 * basis.num_ctrl();
  const int split = nv >= wanted ? 1 : (2 * wanted + nseg - 1) / nseg;

  std::vector<Eigen::RowVector2d> pts;
  std::vector<double> arc;
  double acc = 0.0;
  for (int k = 0; k < nseg; ++k) {
    const Eigen::RowVector2d a = poly.row(k), b = poly.row((k + 1) % nv);
    const double len = (b - a).norm();
    for (int r = 0; r < split; ++r) {
      const double u = static_cast<double>(r) / split;
      pts.push_back((1 - u) * a + u * b);
      arc.push_back(acc + u * len);
    }
    acc += len;
  }
  if (!closed) {
    pts.push_back(poly.row(nv - 1));
    arc.push_back(acc);
  }
  const int m = static_cast<int>(pts.size());
  Eigen::MatrixXd design(m, basis.num_ctrl());
  Eigen::MatrixXd rhs(m, 2);
  for (int k = 0; k < m; ++k) {
    const double theta = kTwoPi * arc[k] / acc;
    design.row(k) = basis.dense_row(std::min(theta, kTwoPi));
    rhs.row(k) = pts[k];
  }
  SplineFit fit;
  fit.ctrl = design.colPivHouseholderQr().solve(rhs);
  const double rms = std::sqrt((design * fit.ctrl - rhs).squaredNorm() / m);
  fit.relative_residual = rms / bounding_box_diagonal(curve);
  return fit;
}

MatchReport match_intrinsic(const SimplicialShape& source, const SimplicialShape& target,
                            const MatchConfig& raw_cfg) {
  const auto started = std::chrono::steady_clock::now();
  const MatchConfig cfg = raw_cfg.resolved(source, target);
  const IntrinsicOptions& io = cfg.intrinsic;
  if (source.kind() != ShapeKind::curve || target.kind() != ShapeKind::curve) {
    throw KindMismatch("the intrinsic model matches curves only");
  }
  if (source.dim() != 2 || target.dim() != 2) {
    throw DimensionMismatch("the intrinsic model matches planar curves only");
  }
  if (source.closed() != target.closed()) throw KindMismatch("source and target closedness differ");

  SplinePath path(io.num_ctrl_t, io.num_ctrl_theta, io.degree_t, io.degree_theta, source.closed());
  const SplineFit fit = fit_spline_curve(source, path.basis_theta());
  if (fit.relative_residual > io.fit_tol) {
    throw FitError("source spline fit residual " + std::to_string(fit.relative_residual) +
                   " exceeds tolerance " + std::to_string(io.fit_tol));
  }
  for (int i = 0; i < path.num_t(); ++i) path.set_row(i, fit.ctrl);

  const QuadratureRule quad{io.quad_t, io.quad_theta};
  const VarifoldFidelity fidelity(target, cfg.varifold_kernel());
  const int neval = io.num_eval;
  const int nth = path.num_theta();
  const int last = path.num_t() - 1;
  const auto params = path.sample_params(neval);
  Eigen::MatrixXd sampler(neval, nth);
  for (int k = 0; k < neval; ++k) sampler.row(k) = path.basis_theta().dense_row(params[k]);

  const Eigen::Index free_rows = static_cast<Eigen::Index>(last) * nth;
  auto load = [&](SplinePath& p, const Eigen::VectorXd& x) {
    for (Eigen::Index r = 0; r < free_rows; ++r) {
      p.ctrl().row(nth + r) << x(2 * r), x(2 * r + 1);
    }
  };
  auto endpoint = [&](const SplinePath& p) {
    Points pts = sampler * p.row(last);
    return make_polyline(std::move(pts), p.closed());
  };

  MatchReport report;
  report.model = Model::intrinsic;
  report.solver = Solver::trajectory;
  report.initial_fidelity = fidelity.value(endpoint(path));

  SplinePath work = path;
  const optim::Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    load(work, x);
    Eigen::MatrixXd egrad;
    const double energy = path_energy(work, io.coeffs, quad, &egrad);
    Points fgrad;
    const double fid = fidelity.value_grad(endpoint(work), fgrad);
    egrad.middleRows(static_cast<Eigen::Index>(last) * nth, nth) += cfg.lambda * (sampler.transpose() * fgrad);
    g.resize(x.size());
    for (Eigen::Index r = 0; r < free_rows; ++r) {
      g(2 * r) = egrad(nth + r, 0);
      g(2 * r + 1) = egrad(nth + r, 1);
    }
    return energy + cfg.lambda * fid;
  };
  SplinePath scratch = path;
  const optim::IterationCallback record = [&](int iter, const Eigen::VectorXd& x, double) {
    load(scratch, x);
    EnergyRow row;
    row.iter = iter;
    row.energy = path_energy(scratch, io.coeffs, quad);
    row.fidelity = fidelity.value(endpoint(scratch));
    row.total = row.energy + cfg.lambda * row.fidelity;
    report.history.push_back(row);
  };

  Eigen::VectorXd x0(2 * free_rows);
  for (Eigen::Index r = 0; r < free_rows; ++r) {
    x0(2 * r) = path.ctrl()(nth + r, 0);
    x0(2 * r + 1) = path.ctrl()(nth + r, 1);
  }
  const optim::Result opt = optim::minimize(objective, x0, cfg.optim, record);
  load(path, opt.x);

  report.status = opt.status;
  report.iterations = opt.iterations;
  report.evaluations = opt.evaluations;
  report.energy = path_energy(path, io.coeffs, quad);
  report.fidelity = fidelity.value(endpoint(path));
  report.total = report.energy + cfg.lambda * report.fidelity;
  const int samples = path.num_t();
  report.path_times.resize(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    report.path_times(k) = static_cast<double>(k) / samples;
    report.path.push_back(path.sample(report.path_times(k), neval));
  }
  for (double t : cfg.frame_times) report.frames.push_back({t, path.sample(std::clamp(t, 0.0, 1.0), neval)});
  report.momentum = path.ctrl();
  if (io.coeffs.order() == 0) {
    report.warnings.push_back("metric has no derivative terms (a1 = a2 = 0); geodesic distance is degenerate");
  }
  report.extras["fit_residual"] = fit.relative_residual;
  report.extras["num_eval"] = neval;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

}  // namespace geomatch
