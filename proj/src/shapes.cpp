#include "geomatch/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <vector>

#include "geomatch/error.hpp"

namespace geomatch {

DegenerateSimplex::DegenerateSimplex(int simplex, double measure)
    : Error("degenerate simplex " + std::to_string(simplex) + " (measure " +
            std::to_string(measure) + ")"),
      simplex_(simplex) {}

ParseError::ParseError(const std::string& path, int line, const std::string& what)
    : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

NotImmersed::NotImmersed(double t, double theta, double speed)
    : Error("path not immersed at t=" + std::to_string(t) + ", theta=" + std::to_string(theta) +
            " (|d_theta c| = " + std::to_string(speed) + ")"),
      t_(t),
      theta_(theta) {}

NonFiniteState::NonFiniteState(int step)
    : Error("non-finite state at integration step " + std::to_string(step)), step_(step) {}

ConfigError::ConfigError(std::string key, const std::string& what)
    : Error("config key '" + key + "': " + what), key_(std::move(key)) {}

namespace {

double simplex_measure(const Points& v, const Cells& s, int i) {
  if (s.cols() == 2) {
    return (v.row(s(i, 1)) - v.row(s(i, 0))).norm();
  }
  const Eigen::Vector3d e1 = (v.row(s(i, 1)) - v.row(s(i, 0))).transpose();
  const Eigen::Vector3d e2 = (v.row(s(i, 2)) - v.row(s(i, 0))).transpose();
  return 0.5 * e1.cross(e2).norm();
}

void validate(ShapeKind kind, const Points& v, const Cells& s, bool closed) {
  const int d = static_cast<int>(v.cols());
  const int arity = kind == ShapeKind::curve ? 2 : 3;
  if (kind == ShapeKind::surface && d != 3) {
    throw InvalidShape("surfaces must live in R^3, got d=" + std::to_string(d));
  }
  if (kind == ShapeKind::curve && d != 2 && d != 3) {
    throw InvalidShape("curves must live in R^2 or R^3, got d=" + std::to_string(d));
  }
  if (kind == ShapeKind::surface && closed) {
    throw InvalidShape("the closed flag applies to curves only");
  }
  if (s.rows() == 0) throw InvalidShape("shape has no simplices");
  if (s.cols() != arity) {
    throw InvalidShape("simplices must have " + std::to_string(arity) + " vertices");
  }
  if (!v.allFinite()) throw InvalidShape("non-finite vertex coordinates");
  const int nv = static_cast<int>(v.rows());
  for (int i = 0; i < s.rows(); ++i) {
    for (int a = 0; a < arity; ++a) {
      if (s(i, a) < 0 || s(i, a) >= nv) {
        throw InvalidShape("simplex " + std::to_string(i) + " has out-of-range index " +
                           std::to_string(s(i, a)));
      }
      for (int b = 0; b < a; ++b) {
        if (s(i, a) == s(i, b)) {
          throw InvalidShape("simplex " + std::to_string(i) + " repeats a vertex");
        }
      }
    }
  }
  if (kind == ShapeKind::curve && closed) {
    std::vector<int> heads(nv, 0), tails(nv, 0);
    for (int i = 0; i < s.rows(); ++i) {
      ++tails[s(i, 0)];
      ++heads[s(i, 1)];
    }
    for (int k = 0; k < nv; ++k) {
      if (heads[k] != 1 || tails[k] != 1) {
        throw InvalidShape("closed curve is not consistently oriented at vertex " +
                           std::to_string(k));
      }
    }
  }
  for (int i = 0; i < s.rows(); ++i) {
    const double m = simplex_measure(v, s, i);
    if (!(m > kDegenerateMeasure)) throw DegenerateSimplex(i, m);
  }
}

}  // namespace

SimplicialShape::SimplicialShape(ShapeKind kind, Points vertices, Cells simplices, bool closed)
    : kind_(kind), vertices_(std::move(vertices)), simplices_(std::move(simplices)), closed_(closed) {
  validate(kind_, vertices_, simplices_, closed_);
}

SimplicialShape SimplicialShape::with_vertices(Points vertices) const {
  if (vertices.rows() != vertices_.rows() || vertices.cols() != vertices_.cols()) {
    throw DimensionMismatch("replacement vertex array has the wrong shape");
  }
  return SimplicialShape(kind_, std::move(vertices), simplices_, closed_);
}

bool SimplicialShape::operator==(const SimplicialShape& other) const {
  return kind_ == other.kind_ && closed_ == other.closed_ &&
         vertices_.rows() == other.vertices_.rows() && vertices_.cols() == other.vertices_.cols() &&
         simplices_.rows() == other.simplices_.rows() &&
         simplices_.cols() == other.simplices_.cols() && vertices_ == other.vertices_ &&
         simplices_ == other.simplices_;
}

SimplicialShape make_polyline(Points points, bool closed) {
  const int n = static_cast<int>(points.rows());
  const int ns = closed ? n : n - 1;
  Cells cells(std::max(ns, 0), 2);
  for (int i = 0; i < ns; ++i) {
    cells(i, 0) = i;
    cells(i, 1) = (i + 1) % n;
  }
  return SimplicialShape(ShapeKind::curve, std::move(points), std::move(cells), closed);
}

CellFeatures cell_features(const SimplicialShape& shape) {
  const Points& v = shape.vertices();
  const Cells& s = shape.simplices();
  const int ns = shape.num_simplices();
  const int d = shape.dim();
  CellFeatures f;
  f.barycenters.resize(ns, d);
  f.orientations.resize(ns, d);
  f.measures.resize(ns);
  for (int i = 0; i < ns; ++i) {
    if (s.cols() == 2) {
      const Eigen::RowVectorXd e = v.row(s(i, 1)) - v.row(s(i, 0));
      const double len = e.norm();
      if (!(len > kDegenerateMeasure)) throw DegenerateSimplex(i, len);
      f.barycenters.row(i) = 0.5 * (v.row(s(i, 0)) + v.row(s(i, 1)));
      f.orientations.row(i) = e / len;
      f.measures(i) = len;
    } else {
      const Eigen::Vector3d e1 = (v.row(s(i, 1)) - v.row(s(i, 0))).transpose();
      const Eigen::Vector3d e2 = (v.row(s(i, 2)) - v.row(s(i, 0))).transpose();
      const Eigen::Vector3d n = e1.cross(e2);
      const double nn = n.norm();
      if (!(0.5 * nn > kDegenerateMeasure)) throw DegenerateSimplex(i, 0.5 * nn);
      f.barycenters.row(i) = (v.row(s(i, 0)) + v.row(s(i, 1)) + v.row(s(i, 2))) / 3.0;
      f.orientations.row(i) = n.transpose() / nn;
      f.measures(i) = 0.5 * nn;
    }
  }
  return f;
}

SimplicialShape rigid_transform(const SimplicialShape& shape, const Eigen::MatrixXd& rotation,
                                const Eigen::VectorXd& translation) {
  const int d = shape.dim();
  if (rotation.rows() != d || rotation.cols() != d || translation.size() != d) {
    throw DimensionMismatch("rigid transform does not match the ambient dimension");
  }
  const double orth = (rotation.transpose() * rotation - Eigen::MatrixXd::Identity(d, d)).norm();
  if (orth > 1e-10 || std::abs(rotation.determinant() - 1.0) > 1e-10) {
    throw NotARotation("matrix is not a proper rotation (orthogonality defect " +
                       std::to_string(orth) + ")");
  }
  Points moved = (shape.vertices() * rotation.transpose()).rowwise() + translation.transpose();
  return shape.with_vertices(std::move(moved));
}

SimplicialShape subdivide(const SimplicialShape& shape) {
  const Points& v = shape.vertices();
  const Cells& s = shape.simplices();
  const int nv = shape.num_vertices();
  const int ns = shape.num_simplices();
  std::vector<Eigen::RowVectorXd> extra;
  std::map<std::pair<int, int>, int> midpoint_of;
  auto midpoint = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint_of.find(key);
    if (it != midpoint_of.end()) return it->second;
    const int id = nv + static_cast<int>(extra.size());
    extra.push_back(0.5 * (v.row(a) + v.row(b)));
    midpoint_of.emplace(key, id);
    return id;
  };

  Cells cells;
  if (shape.kind() == ShapeKind::curve) {
    cells.resize(2 * ns, 2);
    for (int i = 0; i < ns; ++i) {
      const int a = s(i, 0), b = s(i, 1);
      const int m = midpoint(a, b);
      cells.row(2 * i) << a, m;
      cells.row(2 * i + 1) << m, b;
    }
  } else {
    cells.resize(4 * ns, 3);
    for (int i = 0; i < ns; ++i) {
      const int a = s(i, 0), b = s(i, 1), c = s(i, 2);
      const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
      cells.row(4 * i) << a, ab, ca;
      cells.row(4 * i + 1) << ab, b, bc;
      cells.row(4 * i + 2) << ca, bc, c;
      cells.row(4 * i + 3) << ab, bc, ca;
    }
  }
  Points verts(nv + static_cast<int>(extra.size()), shape.dim());
  verts.topRows(nv) = v;
  for (std::size_t k = 0; k < extra.size(); ++k) verts.row(nv + static_cast<int>(k)) = extra[k];
  return SimplicialShape(shape.kind(), std::move(verts), std::move(cells), shape.closed());
}

double total_measure(const SimplicialShape& shape) { return cell_features(shape).measures.sum(); }

double bounding_box_diagonal(const SimplicialShape& shape) {
  const Points& v = shape.vertices();
  return (v.colwise().maxCoeff() - v.colwise().minCoeff()).norm();
}

ShapeFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".curve" || ext == ".txt") return ShapeFormat::curve;
  if (ext == ".obj") return ShapeFormat::obj;
  throw UnsupportedFormat("unsupported shape file extension '" + ext + "'");
}

namespace {

bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

SimplicialShape load_curve(const std::filesystem::path& path, std::istream& in) {
  const std::string name = path.string();
  std::string line;
  int lineno = 0;
  auto next = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++lineno;
      if (!skippable(line)) return line;
    }
    throw ParseError(name, lineno, "unexpected end of file");
  };

  std::istringstream header(next());
  std::string tag;
  int d = 0, nv = 0, ns = 0, closed = 0;
  if (!(header >> tag >> d >> nv >> ns >> closed) || tag != "curve") {
    throw ParseError(name, lineno, "expected 'curve <d> <N_V> <N_S> <closed>'");
  }
  if (d < 1 || nv < 1 || ns < 1 || (closed != 0 && closed != 1)) {
    throw ParseError(name, lineno, "invalid header values");
  }
  Points verts(nv, d);
  for (int i = 0; i < nv; ++i) {
    std::istringstream row(next());
    for (int c = 0; c < d; ++c) {
      if (!(row >> verts(i, c))) throw ParseError(name, lineno, "expected vertex coordinate");
    }
    std::string rest;
    if (row >> rest) throw ParseError(name, lineno, "trailing data on vertex line");
  }
  Cells cells(ns, 2);
  for (int i = 0; i < ns; ++i) {
    std::istringstream row(next());
    if (!(row >> cells(i, 0) >> cells(i, 1))) {
      throw ParseError(name, lineno, "expected two segment indices");
    }
    std::string rest;
    if (row >> rest) throw ParseError(name, lineno, "trailing data on segment line");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!skippable(line)) throw ParseError(name, lineno, "trailing content after segments");
  }
  try {
    return SimplicialShape(ShapeKind::curve, std::move(verts), std::move(cells), closed == 1);
  } catch (const InvalidShape& e) {
    throw ParseError(name, lineno, e.what());
  }
}

SimplicialShape load_obj(const std::filesystem::path& path, std::istream& in) {
  const std::string name = path.string();
  std::vector<Eigen::RowVector3d> verts;
  std::vector<Eigen::RowVector3i> faces;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (skippable(line)) continue;
    std::istringstream row(line);
    std::string tag;
    row >> tag;
    if (tag == "v") {
      Eigen::RowVector3d p;
      if (!(row >> p(0) >> p(1) >> p(2))) throw ParseError(name, lineno, "expected 'v x y z'");
      verts.push_back(p);
    } else if (tag == "f") {
      if (line.find('/') != std::string::npos) {
        throw ParseError(name, lineno, "face indices with '/' are not supported");
      }
      Eigen::RowVector3i f;
      if (!(row >> f(0) >> f(1) >> f(2))) throw ParseError(name, lineno, "expected 'f i j k'");
      std::string rest;
      if (row >> rest) throw ParseError(name, lineno, "only triangular faces are supported");
      faces.push_back(f.array() - 1);
    } else if (tag == "o" || tag == "g" || tag == "s" || tag == "vn" || tag == "vt" ||
               tag == "usemtl" || tag == "mtllib") {
      continue;
    } else {
      throw ParseError(name, lineno, "unknown OBJ record '" + tag + "'");
    }
  }
  Points v(static_cast<int>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) v.row(static_cast<int>(i)) = verts[i];
  Cells f(static_cast<int>(faces.size()), 3);
  for (std::size_t i = 0; i < faces.size(); ++i) f.row(static_cast<int>(i)) = faces[i];
  try {
    return SimplicialShape(ShapeKind::surface, std::move(v), std::move(f));
  } catch (const InvalidShape& e) {
    throw ParseError(name, lineno, e.what());
  }
}

}  // namespace

SimplicialShape load_shape(const std::filesystem::path& path) {
  return load_shape(path, format_from_path(path));
}

SimplicialShape load_shape(const std::filesystem::path& path, ShapeFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return format == ShapeFormat::curve ? load_curve(path, in) : load_obj(path, in);
}

void save_shape(const SimplicialShape& shape, const std::filesystem::path& path) {
  save_shape(shape, path, format_from_path(path));
}

void save_shape(const SimplicialShape& shape, const std::filesystem::path& path,
                ShapeFormat format) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  const Points& v = shape.vertices();
  const Cells& s = shape.simplices();
  if (format == ShapeFormat::curve) {
    if (shape.kind() != ShapeKind::curve) throw UnsupportedFormat("curve format holds curves only");
    out << "curve " << shape.dim() << ' ' << shape.num_vertices() << ' ' << shape.num_simplices()
        << ' ' << (shape.closed() ? 1 : 0) << '\n';
    for (int i = 0; i < v.rows(); ++i) {
      for (int c = 0; c < v.cols(); ++c) out << (c ? " " : "") << v(i, c);
      out << '\n';
    }
    for (int i = 0; i < s.rows(); ++i) out << s(i, 0) << ' ' << s(i, 1) << '\n';
  } else {
    if (shape.kind() != ShapeKind::surface) throw UnsupportedFormat("OBJ output holds surfaces only");
    for (int i = 0; i < v.rows(); ++i) {
      out << "v " << v(i, 0) << ' ' << v(i, 1) << ' ' << v(i, 2) << '\n';
    }
    for (int i = 0; i < s.rows(); ++i) {
      out << "f " << s(i, 0) + 1 << ' ' << s(i, 1) + 1 << ' ' << s(i, 2) + 1 << '\n';
    }
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace geomatch
