#include "certopt/problem.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace certopt {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::A1: return "A1";
    case Scenario::A2: return "A2";
    case Scenario::Custom: return "custom";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "A1") return Scenario::A1;
  if (s == "A2") return Scenario::A2;
  if (s == "custom") return Scenario::Custom;
  throw std::invalid_argument("unknown scenario '" + s + "' (expected A1, A2 or custom)");
}

double desired_state_a1(const Point& x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return 2.0 * std::sin(two_pi * x.x()) * std::sin(two_pi * x.y());
}

double desired_state_a2(const Point& x) {
  return 60.0 + 160.0 * (x.x() * (x.x() - 1.0) + x.y() * (x.y() - 1.0));
}

void ProblemSpec::validate(const Mesh& mesh) const {
  if (mesh.n != n) throw std::invalid_argument("problem: mesh resolution does not match n");
  if (!(alpha > 0.0)) throw std::invalid_argument("problem: alpha must be positive");
  if (!(control.lower <= control.upper)) {
    throw std::invalid_argument("problem: control lower bound exceeds upper bound");
  }
  if (!nonlinearity.phi || !nonlinearity.phi_y) {
    throw std::invalid_argument("problem: nonlinearity is incomplete");
  }
  if (!desired_state) throw std::invalid_argument("problem: desired state missing");
  if (state) {
    if (!state->lower || !state->upper) throw std::invalid_argument("problem: state bounds incomplete");
    for (Eigen::Index j = 0; j < mesh.vertex_count(); ++j) {
      const Point x = mesh.vertex(j);
      const double lo = state->lower(x);
      const double hi = state->upper(x);
      if (!(lo < hi)) throw std::invalid_argument("problem: state bounds require y_a < y_b at every node");
      if (mesh.boundary[j] && !(lo < 0.0 && 0.0 < hi)) {
        throw std::invalid_argument("problem: state bounds require y_a < 0 < y_b on the boundary");
      }
    }
  }
}

}  // namespace certopt
