#include "certopt/fem.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

#include "certopt/quadrature.hpp"

namespace certopt {

namespace {

using Matrix3 = Eigen::Matrix3d;
using Vector3 = Eigen::Vector3d;

Eigen::Matrix<double, 2, 3> element_coords(const Mesh& mesh, Eigen::Index t) {
  Eigen::Matrix<double, 2, 3> x;
  for (int k = 0; k < 3; ++k) x.col(k) = mesh.vertices.col(mesh.triangles(k, t));
  return x;
}

Vector3 element_values(const Mesh& mesh, const Vector& v, Eigen::Index t) {
  return {v[mesh.triangles(0, t)], v[mesh.triangles(1, t)], v[mesh.triangles(2, t)]};
}

Matrix3 local_mass(double area) {
  Matrix3 m;
  m << 2, 1, 1,
       1, 2, 1,
       1, 1, 2;
  return (area / 12.0) * m;
}

Matrix3 local_stiffness(const Eigen::Matrix<double, 2, 3>& x) {
  Eigen::Matrix2d jac;
  jac << x.col(1) - x.col(0), x.col(2) - x.col(0);
  const double area = 0.5 * std::abs(jac.determinant());
  const Eigen::Matrix2d inv = jac.inverse();
  Eigen::Matrix<double, 3, 2> grads;
  grads.row(1) = inv.row(0);
  grads.row(2) = inv.row(1);
  grads.row(0) = -grads.row(1) - grads.row(2);
  return area * grads * grads.transpose();
}

const TriangleRule& power_rule(int q) {
  static const std::array<TriangleRule, 7> rules = [] {
    std::array<TriangleRule, 7> r;
    for (int k = 0; k < 7; ++k) r[k] = collapsed_gauss_rule(k);
    return r;
  }();
  return rules.at(q);
}

void check_length(const Mesh& mesh, const Vector& v, const char* where) {
  if (v.size() != mesh.vertex_count()) {
    throw std::invalid_argument(std::string(where) + ": vector length does not match mesh");
  }
}

}  // namespace

FeFunction::FeFunction(const Mesh& m, Vector v, bool zero_boundary)
    : mesh(&m), values(std::move(v)), zero_trace(zero_boundary) {
  check_length(m, values, "FeFunction");
  if (zero_trace) {
    for (Eigen::Index j = 0; j < m.vertex_count(); ++j) {
      if (m.boundary[j] && values[j] != 0.0) {
        throw std::invalid_argument("FeFunction: nonzero boundary value in zero-trace function");
      }
    }
  }
}

SparseMatrix assemble_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.triangle_count());
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Matrix3 k = local_stiffness(element_coords(mesh, t));
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(mesh.triangles(a, t), mesh.triangles(b, t), k(a, b));
      }
    }
  }
  SparseMatrix a(mesh.vertex_count(), mesh.vertex_count());
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

SparseMatrix assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.triangle_count());
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const Matrix3 m = local_mass(mesh.triangle_area(t));
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        triplets.emplace_back(mesh.triangles(a, t), mesh.triangles(b, t), m(a, b));
      }
    }
  }
  SparseMatrix m(mesh.vertex_count(), mesh.vertex_count());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

Vector lumped_mass(const Mesh& mesh) {
  Vector m = Vector::Zero(mesh.vertex_count());
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const double third = mesh.triangle_area(t) / 3.0;
    for (int a = 0; a < 3; ++a) m[mesh.triangles(a, t)] += third;
  }
  return m;
}

double lumped_q_norm(const Mesh& mesh, const Vector& v, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lumped_q_norm: q must be >= 1");
  check_length(mesh, v, "lumped_q_norm");
  const Vector m = lumped_mass(mesh);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) sum += m[j] * std::pow(std::abs(v[j]), q);
  return std::pow(sum, 1.0 / q);
}

double exact_lq_norm(const Mesh& mesh, const Vector& v, int q) {
  if (q < 2 || q > 6) throw std::invalid_argument("exact_lq_norm: q must be an integer in [2, 6]");
  check_length(mesh, v, "exact_lq_norm");
  const TriangleRule& rule = power_rule(q);
  const BaryPolygon whole = {Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()};

  auto integrate_power = [&](const std::array<Vector3, 3>& tri, const Vector3& vals, double sign) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < rule.size(); ++k) {
      const Vector3 lam = tri[0] * rule.points(0, k) + tri[1] * rule.points(1, k) +
                          tri[2] * rule.points(2, k);
      s += rule.weights[k] * std::pow(sign * vals.dot(lam), q);
    }
    return s * relative_area(tri[0], tri[1], tri[2]);
  };

  double total = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.triangle_area(t);
    const Vector3 vals = element_values(mesh, v, t);
    const bool same_sign = vals.minCoeff() >= 0.0 || vals.maxCoeff() <= 0.0;
    if (q % 2 == 0 || same_sign) {
      const double sign = (q % 2 == 1 && vals.maxCoeff() <= 0.0) ? -1.0 : 1.0;
      total += area * integrate_power({whole[0], whole[1], whole[2]}, vals, sign);
      continue;
    }
    for (const bool below : {false, true}) {
      const BaryPolygon piece = clip_polygon(whole, vals, 0.0, below);
      for (const auto& tri : fan_triangulate(piece)) {
        total += area * integrate_power(tri, vals, below ? -1.0 : 1.0);
      }
    }
  }
  return std::pow(total, 1.0 / q);
}

double quadrature_lq_norm(const Mesh& mesh, const Vector& v, double q, int degree) {
  if (!(q >= 1.0)) throw std::invalid_argument("quadrature_lq_norm: q must be >= 1");
  check_length(mesh, v, "quadrature_lq_norm");
  const TriangleRule rule = collapsed_gauss_rule(degree);
  const BaryPolygon whole = {Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()};
  double total = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.triangle_area(t);
    const Vector3 vals = element_values(mesh, v, t);
    for (const bool below : {false, true}) {
      for (const auto& tri : fan_triangulate(clip_polygon(whole, vals, 0.0, below))) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < rule.size(); ++k) {
          const Vector3 lam = tri[0] * rule.points(0, k) + tri[1] * rule.points(1, k) +
                              tri[2] * rule.points(2, k);
          s += rule.weights[k] * std::pow(std::abs(vals.dot(lam)), q);
        }
        total += area * relative_area(tri[0], tri[1], tri[2]) * s;
      }
    }
  }
  return std::pow(total, 1.0 / q);
}

Vector smooth_load(const Mesh& mesh, const ScalarField& f) {
  const TriangleRule& rule = degree5_rule();
  Vector load = Vector::Zero(mesh.vertex_count());
  if (!f) return load;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto x = element_coords(mesh, t);
    const double area = mesh.triangle_area(t);
    for (Eigen::Index k = 0; k < rule.size(); ++k) {
      const Eigen::Vector3d lam = rule.points.col(k);
      const double fw = area * rule.weights[k] * f(x * lam);
      for (int a = 0; a < 3; ++a) load[mesh.triangles(a, t)] += fw * lam[a];
    }
  }
  return load;
}

double smooth_l2_error_sq(const Mesh& mesh, const Vector& v, const ScalarField& f) {
  check_length(mesh, v, "smooth_l2_error_sq");
  const TriangleRule& rule = degree5_rule();
  double total = 0.0;
  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const auto x = element_coords(mesh, t);
    const Vector3 vals = element_values(mesh, v, t);
    double s = 0.0;
    for (Eigen::Index k = 0; k < rule.size(); ++k) {
      const Eigen::Vector3d lam = rule.points.col(k);
      const double e = vals.dot(lam) - (f ? f(x * lam) : 0.0);
      s += rule.weights[k] * e * e;
    }
    total += mesh.triangle_area(t) * s;
  }
  return total;
}

ClampedControl clamped_control(const Mesh& mesh, const Vector& p, double alpha,
                               const ControlBounds& bounds, bool with_free_mass) {
  if (!(alpha > 0.0)) throw std::invalid_argument("clamped_control: alpha must be positive");
  if (!(bounds.lower <= bounds.upper)) {
    throw std::invalid_argument("clamped_control: lower bound exceeds upper bound");
  }
  check_length(mesh, p, "clamped_control");

  const TriangleRule& rule = midpoint_rule();
  const BaryPolygon whole = {Vector3::UnitX(), Vector3::UnitY(), Vector3::UnitZ()};
  const bool has_lower = std::isfinite(bounds.lower);
  const bool has_upper = std::isfinite(bounds.upper);

  ClampedControl out;
  out.load = Vector::Zero(mesh.vertex_count());
  std::vector<Eigen::Triplet<double>> triplets;

  for (Eigen::Index t = 0; t < mesh.triangle_count(); ++t) {
    const double area = mesh.triangle_area(t);
    const Vector3 w = -element_values(mesh, p, t) / alpha;
    Vector3 load_t = Vector3::Zero();
    Matrix3 free_t = Matrix3::Zero();
    double sq_t = 0.0;

    if (w.minCoeff() >= bounds.lower && w.maxCoeff() <= bounds.upper) {
      free_t = local_mass(area);
      load_t = free_t * w;
      sq_t = w.dot(free_t * w);
    } else if (w.maxCoeff() <= bounds.lower || w.minCoeff() >= bounds.upper) {
      const double value = w.maxCoeff() <= bounds.lower ? bounds.lower : bounds.upper;
      load_t = Vector3::Constant(value * area / 3.0);
      sq_t = value * value * area;
    } else {
      BaryPolygon rest = whole;
      std::vector<std::pair<BaryPolygon, double>> clamped;
      if (has_lower) {
        clamped.emplace_back(clip_polygon(rest, w, bounds.lower, true), bounds.lower);
        rest = clip_polygon(rest, w, bounds.lower, false);
      }
      if (has_upper) {
        clamped.emplace_back(clip_polygon(rest, w, bounds.upper, false), bounds.upper);
        rest = clip_polygon(rest, w, bounds.upper, true);
      }
      for (const auto& [poly, value] : clamped) {
        for (const auto& tri : fan_triangulate(poly)) {
          const double sub_area = area * relative_area(tri[0], tri[1], tri[2]);
          const Vector3 centroid = (tri[0] + tri[1] + tri[2]) / 3.0;
          // lambda is affine, so its centroid value integrates exactly
          load_t += value * sub_area * centroid;
          sq_t += value * value * sub_area;
        }
      }
      for (const auto& tri : fan_triangulate(rest)) {
        const double sub_area = area * relative_area(tri[0], tri[1], tri[2]);
        for (Eigen::Index k = 0; k < rule.size(); ++k) {
          const Vector3 lam = tri[0] * rule.points(0, k) + tri[1] * rule.points(1, k) +
                              tri[2] * rule.points(2, k);
          const double wk = sub_area * rule.weights[k];
          const double u = w.dot(lam);
          load_t += wk * u * lam;
          sq_t += wk * u * u;
          free_t += wk * lam * lam.transpose();
        }
      }
    }

    for (int a = 0; a < 3; ++a) out.load[mesh.triangles(a, t)] += load_t[a];
    out.sq_norm += sq_t;
    if (with_free_mass) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          if (free_t(a, b) != 0.0) {
            triplets.emplace_back(mesh.triangles(a, t), mesh.triangles(b, t), free_t(a, b));
          }
        }
      }
    }
  }
  if (with_free_mass) {
    out.free_mass.resize(mesh.vertex_count(), mesh.vertex_count());
    out.free_mass.setFromTriplets(triplets.begin(), triplets.end());
  }
  return out;
}

Vector clamped_control_load(const Mesh& mesh, const Vector& p, double alpha,
                            const ControlBounds& bounds) {
  return clamped_control(mesh, p, alpha, bounds, false).load;
}

double clamped_control_sq_norm(const Mesh& mesh, const Vector& p, double alpha,
                               const ControlBounds& bounds) {
  return clamped_control(mesh, p, alpha, bounds, false).sq_norm;
}

}  // namespace certopt
