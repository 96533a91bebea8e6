#include "geomatch/run_output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "geomatch/error.hpp"

namespace geomatch {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string polyline_path(const SimplicialShape& c) {
  // Segments may come in any order, so each one starts its own subpath
  // unless it continues the previous one.
  std::ostringstream d;
  int prev = -1;
  const Cells& s = c.simplices();
  for (int i = 0; i < s.rows(); ++i) {
    const int a = s(i, 0), b = s(i, 1);
    if (a != prev) d << (i ? " M " : "M ") << num(c.vertices()(a, 0)) << ' ' << num(c.vertices()(a, 1));
    d << " L " << num(c.vertices()(b, 0)) << ' ' << num(c.vertices()(b, 1));
    prev = b;
  }
  return d.str();
}

}  // namespace

std::string energy_csv(const MatchReport& report) {
  std::ostringstream out;
  out << "iter,energy,fidelity,total";
  if (report.split_energy) out << ",outer_energy,intrinsic_energy";
  out << '\n';
  for (const auto& r : report.history) {
    out << r.iter << ',' << num(r.energy) << ',' << num(r.fidelity) << ',' << num(r.total);
    if (report.split_energy) out << ',' << num(r.outer) << ',' << num(r.intrinsic);
    out << '\n';
  }
  return out.str();
}

json report_json(const MatchReport& r, const MatchConfig& effective) {
  json j;
  j["model"] = to_string(r.model);
  j["solver"] = to_string(r.solver);
  j["status"] = optim::to_string(r.status);
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["energy"] = r.energy;
  j["fidelity"] = r.fidelity;
  j["initial_fidelity"] = r.initial_fidelity;
  j["fidelity_reduction"] = r.fidelity_reduction();
  j["total"] = r.total;
  j["max_log_edge_change"] = r.model == Model::intrinsic ? json(nullptr) : json(max_log_edge_change(r.path));
  j["warnings"] = r.warnings;
  j["extras"] = r.extras;
  j["timings"] = {{"seconds", r.seconds}};
  j["config"] = config_to_json(effective);
  return j;
}

std::string curve_svg(const SimplicialShape& curve, const SimplicialShape* target) {
  if (curve.kind() != ShapeKind::curve || curve.dim() != 2) throw KindMismatch("SVG output needs a planar curve");
  Eigen::RowVector2d lo = curve.vertices().colwise().minCoeff();
  Eigen::RowVector2d hi = curve.vertices().colwise().maxCoeff();
  if (target && target->dim() == 2) {
    lo = lo.cwiseMin(target->vertices().colwise().minCoeff());
    hi = hi.cwiseMax(target->vertices().colwise().maxCoeff());
  }
  const double pad = 0.05 * std::max((hi - lo).maxCoeff(), 1e-9);
  lo.array() -= pad;
  hi.array() += pad;
  const double stroke = 0.004 * (hi - lo).maxCoeff();
  std::ostringstream out;
  // y is flipped by the group transform so the coordinates stay untouched.
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << num(lo(0)) << ' ' << num(-hi(1)) << ' '
      << num(hi(0) - lo(0)) << ' ' << num(hi(1) - lo(1)) << "\" width=\"512\" height=\"512\">\n";
  out << "<g transform=\"scale(1,-1)\" fill=\"none\" stroke-width=\"" << num(stroke) << "\">\n";
  if (target && target->kind() == ShapeKind::curve && target->dim() == 2) {
    out << "<path class=\"target\" stroke=\"#999999\" d=\"" << polyline_path(*target) << "\"/>\n";
  }
  out << "<path class=\"shape\" stroke=\"#1f4e9c\" d=\"" << polyline_path(curve) << "\"/>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

void write_run(const fs::path& dir, const MatchReport& report, const MatchConfig& effective,
               const SimplicialShape* target) {
  fs::create_directories(dir);
  fs::remove(dir / "FAILED");
  for (std::size_t k = 0; k < report.frames.size(); ++k) {
    const SimplicialShape& s = report.frames[k].shape;
    const std::string stem = "frame_" + std::to_string(k);
    const bool curve = s.kind() == ShapeKind::curve;
    save_shape(s, dir / (stem + (curve ? ".curve" : ".obj")));
    if (curve && s.dim() == 2) write_text(dir / (stem + ".svg"), curve_svg(s, target));
  }
  write_text(dir / "energy.csv", energy_csv(report));
  std::ostringstream mom;
  for (Eigen::Index i = 0; i < report.momentum.rows(); ++i) {
    for (Eigen::Index c = 0; c < report.momentum.cols(); ++c) mom << (c ? " " : "") << num(report.momentum(i, c));
    mom << '\n';
  }
  write_text(dir / "momentum.txt", mom.str());
  json rj = report_json(report, effective);
  json times = json::array();
  for (const auto& f : report.frames) times.push_back(f.t);
  rj["frame_times"] = times;
  write_text(dir / "report.json", rj.dump(2) + "\n");
}

void write_failure(const fs::path& dir, const std::string& message) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(dir / "FAILED");
  out << message << '\n';
}

}  // namespace geomatch
