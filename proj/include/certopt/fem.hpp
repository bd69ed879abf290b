#pragma once

#include <limits>

#include <Eigen/Sparse>

#include "certopt/mesh.hpp"

namespace certopt {

using SparseMatrix = Eigen::SparseMatrix<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Continuous piecewise-linear function, stored by nodal values.
struct FeFunction {
  const Mesh* mesh = nullptr;
  Vector values;
  bool zero_trace = false;  // member of the zero-boundary subspace

  FeFunction() = default;
  FeFunction(const Mesh& m, Vector v, bool zero_boundary = false);
};

/// Box [lower, upper] for pointwise control values; infinite ends disable
/// the corresponding threshold.
struct ControlBounds {
  double lower = -kInf;
  double upper = kInf;
};

SparseMatrix assemble_stiffness(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh);

/// m_j = sum over triangles T containing j of |T| / 3.
Vector lumped_mass(const Mesh& mesh);

/// (sum_j m_j |v_j|^q)^(1/q), the norm of I_h |v|^q.
double lumped_q_norm(const Mesh& mesh, const Vector& v, double q);

/// Exact L^q norm of a P1 function for integer q in [2, 6]. Odd powers are
/// integrated piecewise after splitting each triangle along {v = 0}.
double exact_lq_norm(const Mesh& mesh, const Vector& v, int q);

/// Approximate L^q norm for real q >= 1: |v|^q is integrated with a
/// collapsed Gauss rule of the given degree on the sign pieces of each
/// triangle. Exact for integer q <= degree.
double quadrature_lq_norm(const Mesh& mesh, const Vector& v, double q, int degree = 20);

/// Load vector (int f phi_i)_i with the degree-5 rule.
Vector smooth_load(const Mesh& mesh, const ScalarField& f);

/// int (v - f)^2 with the degree-5 rule; an empty f is treated as zero.
double smooth_l2_error_sq(const Mesh& mesh, const Vector& v, const ScalarField& f);

/// Exact integrals of the control u = clamp(-p / alpha, lower, upper).
struct ClampedControl {
  Vector load;               // int u phi_i
  double sq_norm = 0.0;      // int u^2
  SparseMatrix free_mass;    // int_{unclamped} phi_i phi_j
};

ClampedControl clamped_control(const Mesh& mesh, const Vector& p, double alpha,
                               const ControlBounds& bounds, bool with_free_mass = true);

Vector clamped_control_load(const Mesh& mesh, const Vector& p, double alpha,
                            const ControlBounds& bounds);
double clamped_control_sq_norm(const Mesh& mesh, const Vector& p, double alpha,
                               const ControlBounds& bounds);

/// Pointwise clamp(-p / alpha, lower, upper).
inline double clamp_control(double p, double alpha, const ControlBounds& b) {
  const double u = -p / alpha;
  return u < b.lower ? b.lower : (u > b.upper ? b.upper : u);
}

}  // namespace certopt
