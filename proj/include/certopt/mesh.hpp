#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace certopt {

using Vector = Eigen::VectorXd;
using Point = Eigen::Vector2d;
using ScalarField = std::function<double(const Point&)>;

/// Uniform Friedrichs-Keller triangulation of the unit square.
///
/// Vertex (i, k) with coordinates (i/n, k/n) has index i + (n+1) k. Every
/// grid square is split along its bottom-left to top-right diagonal, which
/// keeps all angles at most 90 degrees and yields the 5-point stiffness
/// stencil at interior vertices.
struct Mesh {
  int n = 0;
  Eigen::Matrix2Xd vertices;
  Eigen::Matrix3Xi triangles;  // counter-clockwise
  std::vector<bool> boundary;
  double h = 0.0;  // longest edge, sqrt(2)/n

  Eigen::Index vertex_count() const { return vertices.cols(); }
  Eigen::Index triangle_count() const { return triangles.cols(); }
  Point vertex(Eigen::Index j) const { return vertices.col(j); }

  double triangle_area(Eigen::Index t) const;
  int vertex_index(int i, int k) const { return i + (n + 1) * k; }

  /// Interior vertices in increasing order.
  std::vector<int> interior_vertices() const;
  /// Map vertex -> position in interior_vertices(), or -1 on the boundary.
  std::vector<int> interior_index() const;
};

Mesh build_uniform_mesh(int n);

/// Nodal (Lagrange) interpolation I_h f.
Vector interpolate(const ScalarField& f, const Mesh& mesh);

/// Index of the image of vertex j under x -> (1 - x1, 1 - x2).
int reflected_vertex(const Mesh& mesh, int j);

}  // namespace certopt
