#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>

namespace geomatch {

/// Row-major N x d array of points or per-point vectors.
using Points = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Row-major N_S x (2|3) array of vertex indices.
using Cells = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ShapeKind { curve, surface };

/// Polygonal curve or triangulated surface in R^2 / R^3.
///
/// Immutable after construction. The constructor validates index ranges,
/// simplex arity, ambient dimension, consistent orientation of closed curves
/// and nondegeneracy (every simplex measure above 1e-14).
class SimplicialShape {
 public:
  SimplicialShape(ShapeKind kind, Points vertices, Cells simplices, bool closed = false);

  ShapeKind kind() const { return kind_; }
  int dim() const { return static_cast<int>(vertices_.cols()); }
  int num_vertices() const { return static_cast<int>(vertices_.rows()); }
  int num_simplices() const { return static_cast<int>(simplices_.rows()); }
  bool closed() const { return closed_; }
  const Points& vertices() const { return vertices_; }
  const Cells& simplices() const { return simplices_; }

  /// Same connectivity, new vertex positions (validated).
  SimplicialShape with_vertices(Points vertices) const;

  bool operator==(const SimplicialShape& other) const;

 private:
  ShapeKind kind_;
  Points vertices_;
  Cells simplices_;
  bool closed_;
};

/// Polyline through `points`, closed back to the first point if requested.
SimplicialShape make_polyline(Points points, bool closed);

struct CellFeatures {
  Points barycenters;
  /// Unit tangents (segments) or unit normals (triangles).
  Points orientations;
  Eigen::VectorXd measures;
};

inline constexpr double kDegenerateMeasure = 1e-14;

CellFeatures cell_features(const SimplicialShape& shape);

/// x -> R x + b. Throws NotARotation unless R is orthogonal with det +1 (1e-10).
SimplicialShape rigid_transform(const SimplicialShape& shape, const Eigen::MatrixXd& rotation,
                                const Eigen::VectorXd& translation);

/// Midpoint refinement: segments split in two, triangles in four.
SimplicialShape subdivide(const SimplicialShape& shape);

double total_measure(const SimplicialShape& shape);

/// Length of the diagonal of the axis-aligned bounding box.
double bounding_box_diagonal(const SimplicialShape& shape);

enum class ShapeFormat { curve, obj };

/// Picks the format from the extension (.curve / .obj).
ShapeFormat format_from_path(const std::filesystem::path& path);

SimplicialShape load_shape(const std::filesystem::path& path);
SimplicialShape load_shape(const std::filesystem::path& path, ShapeFormat format);
void save_shape(const SimplicialShape& shape, const std::filesystem::path& path);
void save_shape(const SimplicialShape& shape, const std::filesystem::path& path,
                ShapeFormat format);

}  // namespace geomatch
