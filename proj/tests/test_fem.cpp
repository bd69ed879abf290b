#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "doctest.h"

#include "certopt/fem.hpp"
#include "certopt/problem.hpp"
#include "certopt/quadrature.hpp"
#include "oracle/composite_oracle.hpp"

using namespace certopt;

namespace {

Vector random_zero_trace(const Mesh& m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v = Vector::Zero(m.vertex_count());
  for (int j : m.interior_vertices()) v[j] = u(rng);
  return v;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("quadrature rules integrate monomials exactly") {
  // int_{ref} x^a y^b = a! b! / (a + b + 2)!, reference area 1/2
  auto exact = [](int a, int b) {
    return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
  };
  auto check_rule = [&](const TriangleRule& rule) {
    CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= rule.degree; ++a) {
      for (int b = 0; a + b <= rule.degree; ++b) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < rule.size(); ++k) {
          s += rule.weights[k] * std::pow(rule.points(1, k), a) * std::pow(rule.points(2, k), b);
        }
        CHECK(0.5 * s == doctest::Approx(exact(a, b)).epsilon(1e-13));
      }
    }
  };
  check_rule(midpoint_rule());
  check_rule(degree5_rule());
  check_rule(collapsed_gauss_rule(6));
  check_rule(collapsed_gauss_rule(11));
  for (int k = 0; k <= 12; ++k) {
    const TriangleRule r = collapsed_gauss_rule(k);
    CHECK(r.degree >= k);
    check_rule(r);
  }
}

TEST_CASE("stiffness rows sum to zero and matrix is symmetric") {
  for (int n : {1, 3, 8}) {
    const Mesh m = build_uniform_mesh(n);
    const SparseMatrix A = assemble_stiffness(m);
    CHECK(A.rows() == m.vertex_count());
    const Eigen::MatrixXd D(A);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(D.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("stiffness on the reference patch") {
  // two right triangles sharing the diagonal; hypotenuse couplings vanish
  const Mesh m = build_uniform_mesh(1);
  const Eigen::MatrixXd A(assemble_stiffness(m));
  Eigen::Matrix4d expected;
  // order: v00, v10, v01, v11
  expected << 1.0, -0.5, -0.5, 0.0,
              -0.5, 1.0, 0.0, -0.5,
              -0.5, 0.0, 1.0, -0.5,
              0.0, -0.5, -0.5, 1.0;
  CHECK((A - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reference triangle local stiffness") {
  Mesh m = build_uniform_mesh(1);
  m.triangles.resize(3, 1);
  m.triangles.col(0) << 0, 1, 2;  // (0,0),(1,0),(0,1)
  const Eigen::MatrixXd A(assemble_stiffness(m));
  Eigen::Matrix3d expected;
  expected << 1.0, -0.5, -0.5, -0.5, 0.5, 0.0, -0.5, 0.0, 0.5;
  CHECK((A.topLeftCorner(3, 3) - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("five-point stencil at interior vertices") {
  const int n = 6;
  const Mesh m = build_uniform_mesh(n);
  const SparseMatrix A = assemble_stiffness(m);
  for (int k = 1; k < n; ++k) {
    for (int i = 1; i < n; ++i) {
      const int j = m.vertex_index(i, k);
      CHECK(A.coeff(j, j) == doctest::Approx(4.0).epsilon(1e-14));
      CHECK(A.coeff(j, m.vertex_index(i + 1, k)) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(A.coeff(j, m.vertex_index(i - 1, k)) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(A.coeff(j, m.vertex_index(i, k + 1)) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(A.coeff(j, m.vertex_index(i, k - 1)) == doctest::Approx(-1.0).epsilon(1e-14));
      CHECK(std::abs(A.coeff(j, m.vertex_index(i + 1, k + 1))) < 1e-15);
      CHECK(std::abs(A.coeff(j, m.vertex_index(i - 1, k - 1))) < 1e-15);
    }
  }
}

TEST_CASE("interior stiffness is positive definite") {
  const Mesh m = build_uniform_mesh(5);
  const Eigen::MatrixXd A(assemble_stiffness(m));
  const auto inner = m.interior_vertices();
  Eigen::MatrixXd Ai(inner.size(), inner.size());
  for (std::size_t r = 0; r < inner.size(); ++r)
    for (std::size_t c = 0; c < inner.size(); ++c) Ai(r, c) = A(inner[r], inner[c]);
  Eigen::LLT<Eigen::MatrixXd> llt(Ai);
  CHECK(llt.info() == Eigen::Success);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Ai);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("stiffness kernel is the constants") {
  const Mesh m = build_uniform_mesh(4);
  const Eigen::MatrixXd A(assemble_stiffness(m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  CHECK(std::abs(es.eigenvalues()[0]) < 1e-12);
  CHECK(es.eigenvalues()[1] > 1e-3);
}

TEST_CASE("mass matrix") {
  const Mesh m = build_uniform_mesh(7);
  const SparseMatrix M = assemble_mass(m);
  const Eigen::MatrixXd D(M);
  CHECK(D.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((D - D.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::LLT<Eigen::MatrixXd> llt(D);
  CHECK(llt.info() == Eigen::Success);
  const Vector lumped = lumped_mass(m);
  CHECK((D.rowwise().sum() - lumped).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("local mass matrix") {
  Mesh m = build_uniform_mesh(1);
  m.triangles.resize(3, 1);
  m.triangles.col(0) << 0, 1, 2;
  const Eigen::MatrixXd M(assemble_mass(m));
  Eigen::Matrix3d expected;
  expected << 2, 1, 1, 1, 2, 1, 1, 1, 2;
  expected *= 0.5 / 12.0;
  CHECK((M.topLeftCorner(3, 3) - expected).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("lumped mass weights") {
  const int n = 8;
  const Mesh m = build_uniform_mesh(n);
  const Vector w = lumped_mass(m);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((w.array() > 0.0).all());
  for (int j : m.interior_vertices()) CHECK(w[j] == doctest::Approx(1.0 / (n * n)).epsilon(1e-14));
  std::mt19937_64 rng(7);
  const Vector v = random_zero_trace(m, rng);
  const SparseMatrix M = assemble_mass(m);
  CHECK(w.dot(v) == doctest::Approx(Vector::Ones(m.vertex_count()).dot(M * v)).epsilon(1e-13));
}

TEST_CASE("lumped q-norm examples") {
  const int n = 4;
  const Mesh m = build_uniform_mesh(n);
  const Vector c = Vector::Constant(m.vertex_count(), -2.5);
  for (double q : {1.0, 2.0, 3.5, 6.0}) CHECK(lumped_q_norm(m, c, q) == doctest::Approx(2.5).epsilon(1e-14));
  Vector e = Vector::Zero(m.vertex_count());
  e[m.vertex_index(2, 1)] = 1.0;
  for (double q : {2.0, 3.0, 4.0, 6.0})
    CHECK(lumped_q_norm(m, e, q) == doctest::Approx(std::pow(n, -2.0 / q)).epsilon(1e-14));
  CHECK(lumped_q_norm(m, Vector::Zero(m.vertex_count()), 2.0) == 0.0);
  CHECK_THROWS_AS(lumped_q_norm(m, c, 0.5), std::invalid_argument);
}

TEST_CASE("exact L^q norm examples") {
  const Mesh m = build_uniform_mesh(6);
  const Vector c = Vector::Constant(m.vertex_count(), 1.75);
  for (int q = 2; q <= 6; ++q) CHECK(exact_lq_norm(m, c, q) == doctest::Approx(1.75).epsilon(1e-14));
  // int_0^1 |x - 1/2|^3 = 1/32; n = 6 puts the zero line on mesh lines
  for (int n : {5, 6}) {
    const Mesh mn = build_uniform_mesh(n);
    const Vector v = interpolate([](const Point& x) { return x.x() - 0.5; }, mn);
    CHECK(exact_lq_norm(mn, v, 3) == doctest::Approx(0.3149802624737183).epsilon(1e-14));
  }
  CHECK_THROWS_AS(exact_lq_norm(m, c, 1), std::invalid_argument);
  CHECK_THROWS_AS(exact_lq_norm(m, c, 7), std::invalid_argument);
}

TEST_CASE("exact L^2 norm matches the mass form") {
  const Mesh m = build_uniform_mesh(9);
  std::mt19937_64 rng(3);
  const SparseMatrix M = assemble_mass(m);
  for (int r = 0; r < 20; ++r) {
    const Vector v = random_zero_trace(m, rng, 3.0);
    const double a = exact_lq_norm(m, v, 2);
    CHECK(rel_err(a * a, v.dot(M * v)) < 1e-12);
  }
}

TEST_CASE("exact norms agree with the oracle and the quadrature fallback") {
  const Mesh m = build_uniform_mesh(4);
  std::mt19937_64 rng(11);
  for (int r = 0; r < 5; ++r) {
    const Vector v = random_zero_trace(m, rng, 2.0);
    for (int q = 2; q <= 6; ++q) {
      const double ref = oracle::lq_norm(m, v, q);
      CHECK(rel_err(exact_lq_norm(m, v, q), ref) < 1e-10);
      CHECK(rel_err(quadrature_lq_norm(m, v, q), ref) < 1e-10);
    }
  }
}

TEST_CASE("norm equivalence between lumped and exact norms") {
  // Lower bound is Jensen. Upper factor 4 holds for q = 2 only; for q > 2 the
  // element bound |p| >= (2 lambda_0 - 1)_+ gives 2 (q + 1) (q + 2).
  std::mt19937_64 rng(2024);
  int failures = 0;
  for (int n : {2, 4, 8}) {
    const Mesh m = build_uniform_mesh(n);
    for (int r = 0; r < 1000; ++r) {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Vector v(m.vertex_count());
      for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = u(rng);
      for (int q : {2, 3, 4, 6}) {
        const double exact = exact_lq_norm(m, v, q);
        const double lumped = lumped_q_norm(m, v, q);
        const double c = q == 2 ? 4.0 : 2.0 * (q + 1) * (q + 2);
        if (!(exact <= lumped + 1e-10 && lumped <= std::pow(c, 1.0 / q) * exact + 1e-10)) ++failures;
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("factor 4 fails above q = 2") {
  // nodal values (1, 0, -1) on both triangles: ratio is (q + 1)(q + 2) / 3
  const Mesh m = build_uniform_mesh(1);
  Vector v = Vector::Zero(4);
  v[0] = 1.0;
  v[3] = -1.0;
  for (int q : {2, 3, 4, 6}) {
    const double ratio = std::pow(lumped_q_norm(m, v, q) / exact_lq_norm(m, v, q), q);
    CHECK(ratio == doctest::Approx((q + 1) * (q + 2) / 3.0).epsilon(1e-13));
  }
}

TEST_CASE("smooth load of the A2 state is exact") {
  const int n = 8;
  const Mesh m = build_uniform_mesh(n);
  const Vector load = smooth_load(m, desired_state_a2);
  // f phi_j is cubic, so a degree-4 collapsed rule is exact
  const TriangleRule rule = collapsed_gauss_rule(4);
  Vector ref = Vector::Zero(m.vertex_count());
  for (Eigen::Index t = 0; t < m.triangle_count(); ++t) {
    const double area = m.triangle_area(t);
    for (Eigen::Index k = 0; k < rule.size(); ++k) {
      Point x = Point::Zero();
      for (int c = 0; c < 3; ++c) x += rule.points(c, k) * m.vertex(m.triangles(c, t));
      const double f = 60.0 + 160.0 * (x.x() * (x.x() - 1.0) + x.y() * (x.y() - 1.0));
      for (int c = 0; c < 3; ++c) ref[m.triangles(c, t)] += area * rule.weights[k] * f * rule.points(c, k);
    }
  }
  CHECK((load - ref).cwiseAbs().maxCoeff() < 1e-13);
  // total integral: 60 + 160 * 2 * (-1/6)
  CHECK(load.sum() == doctest::Approx(60.0 - 320.0 / 6.0).epsilon(1e-13));
}

TEST_CASE("smooth L2 error") {
  const Mesh m = build_uniform_mesh(32);
  CHECK(std::abs(smooth_l2_error_sq(m, Vector::Zero(m.vertex_count()), desired_state_a1) - 1.0) < 1e-6);
  std::mt19937_64 rng(5);
  const Vector v = random_zero_trace(m, rng);
  const SparseMatrix M = assemble_mass(m);
  CHECK(rel_err(smooth_l2_error_sq(m, v, {}), v.dot(M * v)) < 1e-12);
  CHECK(smooth_load(m, {}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("clamped control without active bounds") {
  const Mesh m = build_uniform_mesh(8);
  std::mt19937_64 rng(9);
  const Vector p = random_zero_trace(m, rng);
  const SparseMatrix M = assemble_mass(m);
  const double alpha = 0.3;
  const Vector free_load = -(M * p) / alpha;
  CHECK((clamped_control_load(m, p, alpha, {}) - free_load).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((clamped_control_load(m, p, alpha, {-1e6, 1e6}) - free_load).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(rel_err(clamped_control_sq_norm(m, p, alpha, {-1e6, 1e6}), p.dot(M * p) / (alpha * alpha)) < 1e-13);
  const ClampedControl cc = clamped_control(m, p, alpha, {});
  CHECK(Eigen::MatrixXd(cc.free_mass - M).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("clamped control saturated everywhere") {
  const Mesh m = build_uniform_mesh(6);
  const Vector p = Vector::Constant(m.vertex_count(), 100.0);  // -p/alpha = -100 < u_a
  const ControlBounds b{-2.0, 3.0};
  const Vector load = clamped_control_load(m, p, 1.0, b);
  const Vector w = lumped_mass(m);
  CHECK((load - (-2.0) * w).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(clamped_control_sq_norm(m, p, 1.0, b) == doctest::Approx(4.0).epsilon(1e-14));
  const ClampedControl cc = clamped_control(m, p, 1.0, b);
  CHECK(cc.free_mass.norm() == 0.0);
}

TEST_CASE("clamped control of zero adjoint") {
  const Mesh m = build_uniform_mesh(4);
  CHECK(clamped_control_sq_norm(m, Vector::Zero(m.vertex_count()), 1.0, {-1.0, 1.0}) == 0.0);
}

TEST_CASE("clamped control mixed bands agree with the oracle") {
  const Mesh m = build_uniform_mesh(4);
  std::mt19937_64 rng(17);
  for (int r = 0; r < 5; ++r) {
    const Vector p = random_zero_trace(m, rng, 4.0);
    const double alpha = 0.7;
    for (ControlBounds b : {ControlBounds{-1.5, 2.0}, ControlBounds{-kInf, 0.5}, ControlBounds{0.0, kInf}}) {
      const Vector load = clamped_control_load(m, p, alpha, b);
      const Vector ref = oracle::clamped_load(m, p, alpha, b.lower, b.upper);
      CHECK((load - ref).cwiseAbs().maxCoeff() <= 1e-10 * ref.cwiseAbs().maxCoeff());
      CHECK(rel_err(clamped_control_sq_norm(m, p, alpha, b), oracle::clamped_sq_norm(m, p, alpha, b.lower, b.upper)) <
            1e-10);
    }
  }
}

TEST_CASE("free mass is the generalized derivative of the clamped load") {
  const Mesh m = build_uniform_mesh(5);
  std::mt19937_64 rng(23);
  const Vector p = random_zero_trace(m, rng, 3.0);
  const ControlBounds b{-2.0, 2.0};
  const double alpha = 1.0;
  const ClampedControl cc = clamped_control(m, p, alpha, b);
  const Vector dir = random_zero_trace(m, rng);
  const double eps = 1e-6;
  const Vector fd = (clamped_control_load(m, p + eps * dir, alpha, b) - clamped_control_load(m, p - eps * dir, alpha, b)) /
                    (2.0 * eps);
  const Vector jac = -(cc.free_mass * dir) / alpha;
  CHECK((fd - jac).norm() <= 1e-5 * jac.norm());
}

TEST_CASE("degenerate bands through vertices") {
  // threshold exactly at nodal values: no sliver triangles, still exact
  const Mesh m = build_uniform_mesh(4);
  Vector p = Vector::Zero(m.vertex_count());
  for (int j : m.interior_vertices()) p[j] = (j % 3) - 1.0;  // values -1, 0, 1
  const ControlBounds b{-1.0, 0.0};
  const Vector load = clamped_control_load(m, p, 1.0, b);
  const Vector ref = oracle::clamped_load(m, p, 1.0, b.lower, b.upper);
  CHECK((load - ref).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("clamped control rejects bad arguments") {
  const Mesh m = build_uniform_mesh(2);
  const Vector p = Vector::Zero(m.vertex_count());
  CHECK_THROWS_AS(clamped_control_load(m, p, 0.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(clamped_control_load(m, p, -1.0, {}), std::invalid_argument);
  CHECK_THROWS_AS(clamped_control_sq_norm(m, p, 1.0, {2.0, 1.0}), std::invalid_argument);
}

TEST_CASE("fe function invariants") {
  const Mesh m = build_uniform_mesh(3);
  CHECK_THROWS_AS(FeFunction(m, Vector::Zero(5)), std::invalid_argument);
  CHECK_THROWS_AS(FeFunction(m, Vector::Ones(m.vertex_count()), true), std::invalid_argument);
  CHECK_NOTHROW(FeFunction(m, Vector::Ones(m.vertex_count()), false));
}

TEST_CASE("assembly is deterministic") {
  const Mesh m = build_uniform_mesh(10);
  const Eigen::MatrixXd A1(assemble_stiffness(m)), A2(assemble_stiffness(m));
  const Eigen::MatrixXd M1(assemble_mass(m)), M2(assemble_mass(m));
  CHECK((A1.array() == A2.array()).all());
  CHECK((M1.array() == M2.array()).all());
}
