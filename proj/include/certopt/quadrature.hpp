#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

namespace certopt {

/// Quadrature rule on a triangle in barycentric coordinates. Weights are
/// normalized to sum to one, so an integral is area * sum(w_k f(x_k)).
struct TriangleRule {
  Eigen::Matrix3Xd points;
  Eigen::VectorXd weights;
  int degree = 0;

  Eigen::Index size() const { return weights.size(); }
};

/// Gauss-Legendre nodes and weights on [0, 1].
void gauss_legendre_unit(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/// Three edge-midpoint rule, exact for polynomials of degree 2.
const TriangleRule& midpoint_rule();

/// Symmetric 7-point rule, exact for polynomials of degree 5.
const TriangleRule& degree5_rule();

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of degree `degree`.
TriangleRule collapsed_gauss_rule(int degree);

/// Convex polygon inside a reference triangle, vertices in barycentric
/// coordinates of that triangle.
using BaryPolygon = std::vector<Eigen::Vector3d>;

/// Keeps the part of `poly` where the affine function with nodal values
/// `values` is <= level (keep_below) or >= level (otherwise).
BaryPolygon clip_polygon(const BaryPolygon& poly, const Eigen::Vector3d& values, double level,
                         bool keep_below);

/// Area of the sub-triangle (a, b, c) relative to its parent triangle.
double relative_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Fan triangulation of a convex polygon. Triangles with relative area below
/// `min_relative_area` are dropped.
std::vector<std::array<Eigen::Vector3d, 3>> fan_triangulate(const BaryPolygon& poly,
                                                            double min_relative_area = 1e-14);

}  // namespace certopt
