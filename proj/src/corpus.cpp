#include "geomatch/corpus.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace geomatch::corpus {

namespace {

constexpr double kPi = std::numbers::pi;

template <class F>
SimplicialShape sample_closed(int n, F&& point) {
  Points p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double th = 2.0 * kPi * i / n;
    const auto [x, y] = point(th);
    p(i, 0) = x;
    p(i, 1) = y;
  }
  return make_polyline(std::move(p), true);
}

}  // namespace

SimplicialShape circle(int n, double radius, double cx, double cy) {
  return sample_closed(n, [&](double th) {
    return std::pair{cx + radius * std::cos(th), cy + radius * std::sin(th)};
  });
}

SimplicialShape ellipse(int n, double a, double b) {
  return sample_closed(n, [&](double th) { return std::pair{a * std::cos(th), b * std::sin(th)}; });
}

SimplicialShape necked_ellipse(int n, double a, double b, double neck) {
  return sample_closed(n, [&](double th) {
    const double c = std::cos(th);
    return std::pair{a * c, b * std::sin(th) * (neck + (1.0 - neck) * c * c)};
  });
}

SimplicialShape square(int n, double side) {
  const int per_side = std::max(1, n / 4);
  const double h = 0.5 * side;
  const double corners[5][2] = {{-h, -h}, {h, -h}, {h, h}, {-h, h}, {-h, -h}};
  Points p(4 * per_side, 2);
  for (int s = 0; s < 4; ++s) {
    for (int k = 0; k < per_side; ++k) {
      const double u = static_cast<double>(k) / per_side;
      p(s * per_side + k, 0) = (1 - u) * corners[s][0] + u * corners[s + 1][0];
      p(s * per_side + k, 1) = (1 - u) * corners[s][1] + u * corners[s + 1][1];
    }
  }
  return make_polyline(std::move(p), true);
}

SimplicialShape star(int n, int branches, double inner, double outer) {
  return sample_closed(n, [&](double th) {
    const double r = 0.5 * (inner + outer) + 0.5 * (outer - inner) * std::cos(branches * th);
    return std::pair{r * std::cos(th), r * std::sin(th)};
  });
}

SimplicialShape limacon(int n, double a, double b) {
  return sample_closed(n, [&](double th) {
    const double r = b + a * std::cos(th);
    return std::pair{r * std::cos(th), r * std::sin(th)};
  });
}

SimplicialShape icosphere(int level, double radius, double cx, double cy, double cz) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
                                    {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
                                    {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Eigen::Vector3i> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& p : v) p.normalize();
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    for (const auto& tri : f) {
      const int a = midpoint(tri(0), tri(1)), b = midpoint(tri(1), tri(2)),
                c = midpoint(tri(2), tri(0));
      next.push_back({tri(0), a, c});
      next.push_back({tri(1), b, a});
      next.push_back({tri(2), c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  Points verts(static_cast<int>(v.size()), 3);
  for (std::size_t i = 0; i < v.size(); ++i) {
    verts.row(static_cast<int>(i)) = (radius * v[i] + Eigen::Vector3d(cx, cy, cz)).transpose();
  }
  Cells cells(static_cast<int>(f.size()), 3);
  for (std::size_t i = 0; i < f.size(); ++i) cells.row(static_cast<int>(i)) = f[i].transpose();
  return SimplicialShape(ShapeKind::surface, std::move(verts), std::move(cells));
}

SimplicialShape torus_patch(int n_major, int n_minor, double major, double minor, double sweep) {
  const int rows = n_major + 1;
  Points verts(rows * n_minor, 3);
  for (int i = 0; i < rows; ++i) {
    const double phi = sweep * i / n_major;
    for (int j = 0; j < n_minor; ++j) {
      const double psi = 2.0 * kPi * j / n_minor;
      const double r = major + minor * std::cos(psi);
      verts.row(i * n_minor + j) << r * std::cos(phi), r * std::sin(phi), minor * std::sin(psi);
    }
  }
  Cells cells(2 * n_major * n_minor, 3);
  int k = 0;
  for (int i = 0; i < n_major; ++i) {
    for (int j = 0; j < n_minor; ++j) {
      const int a = i * n_minor + j, b = (i + 1) * n_minor + j;
      const int c = (i + 1) * n_minor + (j + 1) % n_minor, e = i * n_minor + (j + 1) % n_minor;
      cells.row(k++) << a, b, c;
      cells.row(k++) << a, c, e;
    }
  }
  return SimplicialShape(ShapeKind::surface, std::move(verts), std::move(cells));
}

std::vector<std::pair<std::string, SimplicialShape>> curve_corpus() {
  return {{"circle", circle(32)},
          {"ellipse", ellipse(32)},
          {"square", square(32)},
          {"star", star(32)},
          {"necked_ellipse", necked_ellipse(32)},
          {"limacon", limacon(32)}};
}

std::vector<std::pair<std::string, SimplicialShape>> surface_corpus() {
  return {{"sphere", icosphere(1)},
          {"sphere_shifted", icosphere(1, 0.8, 0.3, 0.1, 0.0)},
          {"torus_patch", torus_patch(12, 8)}};
}

}  // namespace geomatch::corpus
