#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "certopt/fem.hpp"
#include "certopt/mesh.hpp"
#include "certopt/nonlinearity.hpp"

namespace certopt {

enum class Scenario { A1, A2, Custom };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Reachable target 2 sin(2 pi x1) sin(2 pi x2).
double desired_state_a1(const Point& x);
/// Unreachable target 60 + 160 (x1 (x1 - 1) + x2 (x2 - 1)).
double desired_state_a2(const Point& x);

/// Pointwise bounds y_a <= y <= y_b on the closed domain.
struct StateBounds {
  ScalarField lower;
  ScalarField upper;
};

/// One instance of the optimal control problem
///   min 1/2 |y - y0|^2 + alpha/2 |u|^2,  -Laplace y + phi(y) = u,
/// with optional control box and state bounds.
struct ProblemSpec {
  int n = 32;
  Nonlinearity nonlinearity = make_power_law(1.0, 3.0);
  double alpha = 1.0;
  Scenario scenario = Scenario::A1;
  ScalarField desired_state = desired_state_a1;
  ControlBounds control;
  std::optional<StateBounds> state;

  bool has_control_bounds() const {
    return std::isfinite(control.lower) || std::isfinite(control.upper);
  }
  /// Combined control and state bounds are accepted but untested territory.
  bool experimental() const { return has_control_bounds() && state.has_value(); }

  /// Throws std::invalid_argument naming the violated requirement.
  void validate(const Mesh& mesh) const;
};

}  // namespace certopt
