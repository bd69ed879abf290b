#include <Eigen/LU>

#include "certopt/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace certopt {

void gauss_legendre_unit(int count, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  if (count < 1) throw std::invalid_argument("gauss_legendre_unit: count must be >= 1");
  nodes.resize(count);
  weights.resize(count);
  for (int i = 0; i < count; ++i) {
    // Newton on P_count starting from the Chebyshev-like guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (count + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= count; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = count * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 - x);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

const TriangleRule& midpoint_rule() {
  static const TriangleRule rule = [] {
    TriangleRule r;
    r.degree = 2;
    r.points.resize(3, 3);
    r.points << 0.5, 0.0, 0.5,
                0.5, 0.5, 0.0,
                0.0, 0.5, 0.5;
    r.weights = Eigen::Vector3d::Constant(1.0 / 3.0);
    return r;
  }();
  return rule;
}

const TriangleRule& degree5_rule() {
  static const TriangleRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0;
    const double b = (6.0 + s15) / 21.0;
    const double wa = (155.0 - s15) / 1200.0;
    const double wb = (155.0 + s15) / 1200.0;
    TriangleRule r;
    r.degree = 5;
    r.points.resize(3, 7);
    r.weights.resize(7);
    r.points.col(0) = Eigen::Vector3d::Constant(1.0 / 3.0);
    r.weights[0] = 9.0 / 40.0;
    const Eigen::Vector3d pa(a, a, 1.0 - 2.0 * a);
    const Eigen::Vector3d pb(b, b, 1.0 - 2.0 * b);
    for (int k = 0; k < 3; ++k) {
      r.points.col(1 + k) << pa[k], pa[(k + 1) % 3], pa[(k + 2) % 3];
      r.points.col(4 + k) << pb[k], pb[(k + 1) % 3], pb[(k + 2) % 3];
      r.weights[1 + k] = wa;
      r.weights[4 + k] = wb;
    }
    return r;
  }();
  return rule;
}

TriangleRule collapsed_gauss_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("collapsed_gauss_rule: negative degree");
  // Duffy map (s, t) -> (s (1 - t), t) has Jacobian (1 - t); a degree-k
  // polynomial becomes degree k + 1 in t, so count points give 2 count - 2.
  const int count = (degree + 3) / 2;
  Eigen::VectorXd x, w;
  gauss_legendre_unit(count, x, w);
  TriangleRule r;
  r.degree = 2 * count - 2;
  r.points.resize(3, count * count);
  r.weights.resize(count * count);
  int k = 0;
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < count; ++j) {
      const double s = x[i];
      const double t = x[j];
      const double l1 = s * (1.0 - t);
      const double l2 = t;
      r.points.col(k) << 1.0 - l1 - l2, l1, l2;
      r.weights[k] = 2.0 * w[i] * w[j] * (1.0 - t);
      ++k;
    }
  }
  return r;
}

BaryPolygon clip_polygon(const BaryPolygon& poly, const Eigen::Vector3d& values, double level,
                         bool keep_below) {
  BaryPolygon out;
  const std::size_t count = poly.size();
  if (count == 0) return out;
  out.reserve(count + 1);
  auto signed_dist = [&](const Eigen::Vector3d& l) {
    const double f = values.dot(l) - level;
    return keep_below ? -f : f;
  };
  for (std::size_t i = 0; i < count; ++i) {
    const Eigen::Vector3d& cur = poly[i];
    const Eigen::Vector3d& next = poly[(i + 1) % count];
    const double fc = signed_dist(cur);
    const double fn = signed_dist(next);
    if (fc >= 0.0) out.push_back(cur);
    if ((fc > 0.0 && fn < 0.0) || (fc < 0.0 && fn > 0.0)) {
      const double t = fc / (fc - fn);
      out.push_back(cur + t * (next - cur));
    }
  }
  return out;
}

double relative_area(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  Eigen::Matrix3d m;
  m << a, b, c;
  return std::abs(m.determinant());
}

std::vector<std::array<Eigen::Vector3d, 3>> fan_triangulate(const BaryPolygon& poly,
                                                            double min_relative_area) {
  std::vector<std::array<Eigen::Vector3d, 3>> out;
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    if (relative_area(poly[0], poly[i], poly[i + 1]) > min_relative_area) {
      out.push_back({poly[0], poly[i], poly[i + 1]});
    }
  }
  return out;
}

}  // namespace certopt
