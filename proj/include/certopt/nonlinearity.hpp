#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace certopt {

enum class NonlinearityKind { PowerLaw, Exponential, Custom };

std::string to_string(NonlinearityKind kind);

struct PhiValue {
  double phi;
  double phi_y;
};

/// Monotone nonlinearity phi with phi(0) = 0 and the growth-condition
/// parameters (gamma, M) when they are known.
///
/// phi_yy is a generalized second derivative, used only to linearize the
/// adjoint equation in Newton's method.
struct Nonlinearity {
  NonlinearityKind kind = NonlinearityKind::PowerLaw;
  double a = 1.0;
  double p_exp = 3.0;  // power law only
  std::function<double(double)> phi;
  std::function<double(double)> phi_y;
  std::function<double(double)> phi_yy;
  std::optional<double> gamma;
  std::optional<double> M;

  PhiValue eval(double y) const { return {phi(y), phi_y(y)}; }
  bool has_growth_params() const { return gamma.has_value() && M.has_value(); }
};

/// phi(y) = a |y|^(p-2) y with gamma = (p-3)/(p-2) and
/// M = (p-2) (p-1)^(1/(p-2)) a^(1/(p-2)).
Nonlinearity make_power_law(double a, double p_exp);

/// phi(y) = exp(a y) - 1. Convex on the whole line but phi_yy = a phi_y
/// forces gamma = 1, so no growth parameters are attached.
Nonlinearity make_exponential(double a);

/// User-supplied phi; gamma and M are taken as given, never inferred.
Nonlinearity make_custom(std::function<double(double)> phi, std::function<double(double)> phi_y,
                         std::function<double(double)> phi_yy, std::optional<double> gamma,
                         std::optional<double> M);

struct GrowthSampling {
  double lo = -10.0;
  double hi = 10.0;
  std::int64_t count = 1'000'000;
  std::uint64_t seed = 1;
};

struct GrowthEstimate {
  double max_ratio = 0.0;
  double M = 0.0;
  std::int64_t samples = 0;
};

/// Largest sampled |D phi_y| / (D phi)^gamma over random pairs y1 != y2,
/// where D denotes the difference quotient.
GrowthEstimate estimate_growth_ratio(const Nonlinearity& nl, const GrowthSampling& sampling);

/// Ratio for a single pair.
double growth_ratio(const Nonlinearity& nl, double y1, double y2);

}  // namespace certopt
