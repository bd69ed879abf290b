#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "doctest.h"

#include "certopt/mesh.hpp"
#include "certopt/problem.hpp"

using namespace certopt;

TEST_CASE("smallest mesh") {
  const Mesh m = build_uniform_mesh(1);
  CHECK(m.vertex_count() == 4);
  CHECK(m.triangle_count() == 2);
  for (Eigen::Index t = 0; t < 2; ++t) CHECK(m.triangle_area(t) == doctest::Approx(0.5).epsilon(1e-15));
  for (bool b : m.boundary) CHECK(b);
  CHECK(m.interior_vertices().empty());
}

TEST_CASE("n = 2 has one interior vertex") {
  const Mesh m = build_uniform_mesh(2);
  CHECK(m.vertex_count() == 9);
  CHECK(m.triangle_count() == 8);
  const auto interior = m.interior_vertices();
  REQUIRE(interior.size() == 1);
  CHECK(interior[0] == 4);
  CHECK(m.vertex(4).isApprox(Point(0.5, 0.5)));
}

TEST_CASE("n = 32 grid of the experiments") {
  const Mesh m = build_uniform_mesh(32);
  CHECK(m.vertex_count() == 1089);
  CHECK(m.triangle_count() == 2048);
  CHECK(m.h == doctest::Approx(std::sqrt(2.0) / 32.0).epsilon(1e-15));
  CHECK(m.interior_vertices().size() == 31u * 31u);
}

TEST_CASE("n = 0 rejected") {
  CHECK_THROWS_AS(build_uniform_mesh(0), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform_mesh(-3), std::invalid_argument);
}

TEST_CASE("areas, orientation and angles") {
  for (int n : {1, 2, 3, 7, 16}) {
    const Mesh m = build_uniform_mesh(n);
    double total = 0.0;
    for (Eigen::Index t = 0; t < m.triangle_count(); ++t) {
      const double a = m.triangle_area(t);
      CHECK(a == doctest::Approx(1.0 / (2.0 * n * n)).epsilon(1e-13));
      total += a;
      // no obtuse angle: all dot products of edge pairs at a vertex are >= 0
      for (int c = 0; c < 3; ++c) {
        const Point p = m.vertex(m.triangles(c, t));
        const Point e1 = m.vertex(m.triangles((c + 1) % 3, t)) - p;
        const Point e2 = m.vertex(m.triangles((c + 2) % 3, t)) - p;
        CHECK(e1.dot(e2) >= -1e-15);
      }
    }
    CHECK(std::abs(total - 1.0) < 1e-13);
  }
}

TEST_CASE("conforming: each interior edge shared by exactly two triangles") {
  const int n = 5;
  const Mesh m = build_uniform_mesh(n);
  std::map<std::pair<int, int>, int> edges;
  for (Eigen::Index t = 0; t < m.triangle_count(); ++t) {
    for (int c = 0; c < 3; ++c) {
      int a = m.triangles(c, t), b = m.triangles((c + 1) % 3, t);
      if (a > b) std::swap(a, b);
      ++edges[{a, b}];
    }
  }
  int boundary_edges = 0;
  for (const auto& [e, count] : edges) {
    const Point a = m.vertex(e.first), b = m.vertex(e.second);
    const bool on_boundary = (a.x() == b.x() && (a.x() == 0.0 || a.x() == 1.0)) ||
                             (a.y() == b.y() && (a.y() == 0.0 || a.y() == 1.0));
    CHECK(count == (on_boundary ? 1 : 2));
    boundary_edges += on_boundary;
  }
  CHECK(boundary_edges == 4 * n);
}

TEST_CASE("boundary mask and ordering") {
  const int n = 6;
  const Mesh m = build_uniform_mesh(n);
  int interior = 0;
  for (Eigen::Index j = 0; j < m.vertex_count(); ++j) {
    const Point x = m.vertex(j);
    const bool expected = x.x() == 0.0 || x.x() == 1.0 || x.y() == 0.0 || x.y() == 1.0;
    CHECK(m.boundary[j] == expected);
    interior += !expected;
    // lexicographic by (x2, x1)
    CHECK(x.x() == doctest::Approx(static_cast<double>(j % (n + 1)) / n));
    CHECK(x.y() == doctest::Approx(static_cast<double>(j / (n + 1)) / n));
  }
  CHECK(interior == (n - 1) * (n - 1));
  const auto idx = m.interior_index();
  const auto list = m.interior_vertices();
  for (std::size_t r = 0; r < list.size(); ++r) CHECK(idx[list[r]] == static_cast<int>(r));
}

TEST_CASE("interpolation reproduces constants and linear fields") {
  const Mesh m = build_uniform_mesh(4);
  const Vector c = interpolate([](const Point&) { return 3.25; }, m);
  CHECK((c.array() == 3.25).all());
  const Vector x1 = interpolate([](const Point& x) { return x.x(); }, m);
  for (Eigen::Index j = 0; j < m.vertex_count(); ++j) CHECK(x1[j] == m.vertex(j).x());
}

TEST_CASE("A1 desired state at (1/4, 1/4)") {
  const Mesh m = build_uniform_mesh(4);
  const Vector v = interpolate(desired_state_a1, m);
  CHECK(v[m.vertex_index(1, 1)] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("interpolation is a projection") {
  const Mesh m = build_uniform_mesh(8);
  const Vector v = interpolate([](const Point& x) { return std::exp(x.x()) * std::cos(3.0 * x.y()); }, m);
  // interpolating the P1 function itself: evaluate it at the vertices
  const Vector again = interpolate(
      [&](const Point& x) {
        const int i = static_cast<int>(std::lround(x.x() * m.n));
        const int k = static_cast<int>(std::lround(x.y() * m.n));
        return v[m.vertex_index(i, k)];
      },
      m);
  CHECK((again.array() == v.array()).all());
}

TEST_CASE("point reflection permutes vertices and triangles") {
  const Mesh m = build_uniform_mesh(5);
  std::set<int> images;
  for (int j = 0; j < m.vertex_count(); ++j) {
    const int r = reflected_vertex(m, j);
    CHECK(m.vertex(r).isApprox(Point(1.0, 1.0) - m.vertex(j), 1e-15));
    CHECK(reflected_vertex(m, r) == j);
    images.insert(r);
  }
  CHECK(images.size() == static_cast<std::size_t>(m.vertex_count()));

  std::set<std::set<int>> tris;
  for (Eigen::Index t = 0; t < m.triangle_count(); ++t) {
    tris.insert({m.triangles(0, t), m.triangles(1, t), m.triangles(2, t)});
  }
  for (const auto& tri : tris) {
    std::set<int> image;
    for (int j : tri) image.insert(reflected_vertex(m, j));
    CHECK(tris.contains(image));
  }
}
