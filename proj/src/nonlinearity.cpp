#include "certopt/nonlinearity.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace certopt {

std::string to_string(NonlinearityKind kind) {
  switch (kind) {
    case NonlinearityKind::PowerLaw: return "power";
    case NonlinearityKind::Exponential: return "exponential";
    case NonlinearityKind::Custom: return "custom";
  }
  return "unknown";
}

Nonlinearity make_power_law(double a, double p_exp) {
  if (!(a >= 0.0)) throw std::invalid_argument("make_power_law: coefficient a must be >= 0");
  if (!(p_exp >= 3.0)) throw std::invalid_argument("make_power_law: exponent must be >= 3");

  Nonlinearity nl;
  nl.kind = NonlinearityKind::PowerLaw;
  nl.a = a;
  nl.p_exp = p_exp;
  const double e = p_exp - 2.0;
  nl.phi = [a, e](double y) { return a * std::pow(std::abs(y), e) * y; };
  nl.phi_y = [a, e](double y) { return a * (e + 1.0) * std::pow(std::abs(y), e); };
  nl.phi_yy = [a, e](double y) {
    if (y == 0.0) return 0.0;
    const double s = y > 0.0 ? 1.0 : -1.0;
    return a * (e + 1.0) * e * std::pow(std::abs(y), e - 1.0) * s;
  };
  nl.gamma = (p_exp - 3.0) / e;
  nl.M = e * std::pow(p_exp - 1.0, 1.0 / e) * std::pow(a, 1.0 / e);
  return nl;
}

Nonlinearity make_exponential(double a) {
  if (!(a >= 0.0)) throw std::invalid_argument("make_exponential: coefficient a must be >= 0");
  Nonlinearity nl;
  nl.kind = NonlinearityKind::Exponential;
  nl.a = a;
  nl.phi = [a](double y) { return std::expm1(a * y); };
  nl.phi_y = [a](double y) { return a * std::exp(a * y); };
  nl.phi_yy = [a](double y) { return a * a * std::exp(a * y); };
  return nl;
}

Nonlinearity make_custom(std::function<double(double)> phi, std::function<double(double)> phi_y,
                         std::function<double(double)> phi_yy, std::optional<double> gamma,
                         std::optional<double> M) {
  if (!phi || !phi_y) throw std::invalid_argument("make_custom: phi and phi_y are required");
  if (gamma && !(*gamma >= 0.0 && *gamma < 1.0)) {
    throw std::invalid_argument("make_custom: gamma must lie in [0, 1)");
  }
  if (M && !(*M >= 0.0)) throw std::invalid_argument("make_custom: M must be >= 0");
  Nonlinearity nl;
  nl.kind = NonlinearityKind::Custom;
  nl.phi = std::move(phi);
  nl.phi_y = std::move(phi_y);
  nl.phi_yy = phi_yy ? std::move(phi_yy) : [](double) { return 0.0; };
  nl.gamma = gamma;
  nl.M = M;
  return nl;
}

double growth_ratio(const Nonlinearity& nl, double y1, double y2) {
  if (!nl.gamma) throw std::invalid_argument("growth_ratio: gamma unavailable for this nonlinearity");
  const double dy = y2 - y1;
  const double dphi_y = (nl.phi_y(y2) - nl.phi_y(y1)) / dy;
  const double dphi = (nl.phi(y2) - nl.phi(y1)) / dy;
  const double denom = *nl.gamma == 0.0 ? 1.0 : std::pow(dphi, *nl.gamma);
  if (dphi_y == 0.0) return 0.0;
  return std::abs(dphi_y) / denom;
}

GrowthEstimate estimate_growth_ratio(const Nonlinearity& nl, const GrowthSampling& sampling) {
  if (!nl.has_growth_params()) {
    throw std::invalid_argument("estimate_growth_ratio: gamma/M unavailable for this nonlinearity");
  }
  if (!std::isfinite(sampling.lo) || !std::isfinite(sampling.hi) || !(sampling.lo < sampling.hi)) {
    throw std::invalid_argument("estimate_growth_ratio: sample range must be finite and nonempty");
  }
  std::mt19937_64 rng(sampling.seed);
  std::uniform_real_distribution<double> dist(sampling.lo, sampling.hi);
  GrowthEstimate est;
  est.M = *nl.M;
  for (std::int64_t i = 0; i < sampling.count; ++i) {
    const double y1 = dist(rng);
    const double y2 = dist(rng);
    if (y1 == y2) continue;
    est.max_ratio = std::max(est.max_ratio, growth_ratio(nl, y1, y2));
    ++est.samples;
  }
  return est;
}

}  // namespace certopt
