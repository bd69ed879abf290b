#include "certopt/mesh.hpp"

#include <cmath>
#include <stdexcept>

namespace certopt {

double Mesh::triangle_area(Eigen::Index t) const {
  const Point a = vertices.col(triangles(0, t));
  const Point b = vertices.col(triangles(1, t));
  const Point c = vertices.col(triangles(2, t));
  const Point e1 = b - a;
  const Point e2 = c - a;
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

std::vector<int> Mesh::interior_vertices() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>((n - 1) * (n - 1)));
  for (Eigen::Index j = 0; j < vertex_count(); ++j) {
    if (!boundary[j]) out.push_back(static_cast<int>(j));
  }
  return out;
}

std::vector<int> Mesh::interior_index() const {
  std::vector<int> map(vertex_count(), -1);
  int next = 0;
  for (Eigen::Index j = 0; j < vertex_count(); ++j) {
    if (!boundary[j]) map[j] = next++;
  }
  return map;
}

Mesh build_uniform_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_uniform_mesh: n must be >= 1");

  Mesh mesh;
  mesh.n = n;
  mesh.h = std::sqrt(2.0) / n;
  const int side = n + 1;
  mesh.vertices.resize(2, side * side);
  mesh.boundary.assign(side * side, false);
  for (int k = 0; k < side; ++k) {
    for (int i = 0; i < side; ++i) {
      const int j = mesh.vertex_index(i, k);
      mesh.vertices(0, j) = static_cast<double>(i) / n;
      mesh.vertices(1, j) = static_cast<double>(k) / n;
      mesh.boundary[j] = (i == 0 || k == 0 || i == n || k == n);
    }
  }

  mesh.triangles.resize(3, 2 * n * n);
  int t = 0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const int v00 = mesh.vertex_index(i, k);
      const int v10 = mesh.vertex_index(i + 1, k);
      const int v01 = mesh.vertex_index(i, k + 1);
      const int v11 = mesh.vertex_index(i + 1, k + 1);
      mesh.triangles.col(t++) << v00, v10, v11;
      mesh.triangles.col(t++) << v00, v11, v01;
    }
  }
  return mesh;
}

Vector interpolate(const ScalarField& f, const Mesh& mesh) {
  Vector values(mesh.vertex_count());
  for (Eigen::Index j = 0; j < mesh.vertex_count(); ++j) {
    values[j] = f(mesh.vertex(j));
  }
  return values;
}

int reflected_vertex(const Mesh& mesh, int j) {
  const int side = mesh.n + 1;
  const int i = j % side;
  const int k = j / side;
  return mesh.vertex_index(mesh.n - i, mesh.n - k);
}

}  // namespace certopt
