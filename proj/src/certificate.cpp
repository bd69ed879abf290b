#include "certopt/certificate.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace certopt {

double gn_constant(double t, std::optional<double> override_value) {
  if (override_value) {
    if (!(*override_value > 0.0) || !std::isfinite(*override_value)) {
      throw std::invalid_argument("gn_constant: gn_constant_override must be a positive number");
    }
    return *override_value;
  }
  if (std::abs(t - 4.0) < 1e-12) return 1.0 / std::sqrt(kGn4InverseSquared);
  if (std::abs(t - 6.0) < 1e-12) return 1.0 / kGn6Inverse;
  std::ostringstream msg;
  msg << "gn_constant: Gagliardo-Nirenberg constant unavailable for t = " << t
      << " (built in: t = 4, 6); supply it via gn_constant_override";
  throw std::invalid_argument(msg.str());
}

CertificateParams certificate_params(const Nonlinearity& nl, double q, double alpha, int d,
                                     std::optional<double> gn_override, bool extended_d3) {
  if (!nl.has_growth_params()) {
    throw std::invalid_argument("certificate_params: nonlinearity has no growth parameters (gamma, M)");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("certificate_params: alpha must be positive");
  if (d != 2 && d != 3) throw std::invalid_argument("certificate_params: d must be 2 or 3");

  CertificateParams params;
  params.q = q;
  params.gamma = *nl.gamma;
  params.M = *nl.M;
  params.alpha = alpha;
  params.d = d;
  params.extended_d3 = extended_d3;

  const double one_minus = 1.0 - params.gamma;
  std::ostringstream msg;
  if (d == 2) {
    const double lo = 1.0 / one_minus;
    if (!(q > lo) || !std::isfinite(q)) {
      msg << "certificate_params: q = " << q << " outside admissible interval (" << lo << ", inf) for d = 2";
      throw std::invalid_argument(msg.str());
    }
  } else {
    const double lo = 1.5 / one_minus;
    const bool upper_ok = extended_d3 ? std::isfinite(q) : q < 3.0;
    if (!(q >= lo) || !upper_ok) {
      msg << "certificate_params: q = " << q << " outside admissible interval [" << lo << ", "
          << (extended_d3 ? "inf" : "3") << ") for d = 3";
      throw std::invalid_argument(msg.str());
    }
  }

  params.t = 2.0 * q * one_minus / (q * one_minus - 1.0);
  params.rho = d / (2.0 * q) + params.gamma;
  params.C_t = gn_constant(params.t, gn_override);
  return params;
}

double eta(const CertificateParams& params) {
  const double g = params.gamma;
  const double rho = params.rho;
  const double lambda = params.d / (2.0 * params.q);
  if (params.M == 0.0) return std::numeric_limits<double>::infinity();
  const double gamma_pow = g == 0.0 ? 1.0 : std::pow(g, -g);
  return std::pow((1.0 - g) / (2.0 - g), g - 1.0) / params.M * std::pow(params.C_t, 2.0 * (g - 1.0)) *
         std::pow(params.alpha, rho / 2.0) * std::pow(lambda, -lambda) * gamma_pow *
         std::pow(2.0 - rho, rho / 2.0 - 1.0) * std::pow(rho, rho / 2.0);
}

double discrete_threshold(const CertificateParams& params) {
  return std::pow(0.25, 1.0 - params.gamma - 1.0 / params.q) * eta(params);
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedUnique: return "CertifiedUnique";
    case Verdict::CertifiedGlobal: return "CertifiedGlobal";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(CertificateMethod m) {
  switch (m) {
    case CertificateMethod::Lumped: return "lumped";
    case CertificateMethod::ExactNorm: return "exact-norm";
    case CertificateMethod::Sign: return "sign";
  }
  return "unknown";
}

Verdict classify(double norm_value, double threshold, double rel_tol) {
  if (std::isinf(threshold) && threshold > 0.0 && std::isfinite(norm_value)) return Verdict::CertifiedUnique;
  const double margin = threshold - norm_value;
  const double band = rel_tol * threshold;
  if (margin > band) return Verdict::CertifiedUnique;
  if (std::abs(margin) <= band) return Verdict::CertifiedGlobal;
  return Verdict::Inconclusive;
}

namespace {

CertificateReport make_report(CertificateMethod method, double norm_value, double threshold, std::string note) {
  CertificateReport r;
  r.method = method;
  r.norm_value = norm_value;
  r.threshold = threshold;
  r.margin = threshold - norm_value;
  r.verdict = classify(norm_value, threshold);
  r.assumptions_note = std::move(note);
  return r;
}

}  // namespace

CertificateReport certify_discrete(const Mesh& mesh, const Vector& p, const CertificateParams& params) {
  if (params.d != 2) throw std::invalid_argument("certify_discrete: the discrete criterion requires d = 2");
  return make_report(CertificateMethod::Lumped, lumped_q_norm(mesh, p, params.q), discrete_threshold(params),
                     "unique global minimum of the discrete problem when strict");
}

CertificateReport certify_continuous_norm(const Mesh& mesh, const Vector& p, const CertificateParams& params,
                                          bool allow_quadrature_fallback) {
  const double rounded = std::round(params.q);
  const bool integer_q = std::abs(params.q - rounded) < 1e-12 && rounded >= 2.0 && rounded <= 6.0;
  double norm = 0.0;
  std::string note = "continuous-level inequality applied to the discrete adjoint";
  if (integer_q) {
    norm = exact_lq_norm(mesh, p, static_cast<int>(rounded));
  } else if (allow_quadrature_fallback) {
    norm = quadrature_lq_norm(mesh, p, params.q);
    note += "; norm by split degree-20 quadrature";
  } else {
    throw std::invalid_argument("certify_continuous_norm: exact norm needs integer q in [2, 6]; "
                                "request the quadrature fallback for other q");
  }
  return make_report(CertificateMethod::ExactNorm, norm, eta(params), note);
}

CertificateReport certify_sign(const Vector& y, const Vector& p, const ConvexityClaim& claim,
                               bool range_hypothesis_asserted, double tol) {
  // Wrong-signed part of p: positive part for convex phi, negative for concave.
  const double violation =
      p.size() == 0 ? 0.0 : (claim.convex ? std::max(0.0, p.maxCoeff()) : std::max(0.0, -p.minCoeff()));
  bool in_range = true;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (y[j] < claim.lo || y[j] > claim.hi) in_range = false;
  }

  CertificateReport r;
  r.method = CertificateMethod::Sign;
  r.norm_value = violation;
  r.threshold = tol;
  r.margin = tol - violation;
  std::ostringstream note;
  note << "phi asserted " << (claim.convex ? "convex" : "concave") << " on [" << claim.lo << ", " << claim.hi
       << "]; ";
  if (range_hypothesis_asserted) {
    note << "caller asserts every admissible state stays in this interval";
  } else {
    note << "range hypothesis not asserted";
  }
  if (!in_range) note << "; computed state leaves the interval";
  r.assumptions_note = note.str();
  r.verdict = (violation <= tol && in_range && range_hypothesis_asserted) ? Verdict::CertifiedUnique
                                                                         : Verdict::Inconclusive;
  return r;
}

SupersolutionResult check_supersolution(const ScalarField& y_b, const ScalarField& neg_laplacian_y_b,
                                        const Nonlinearity& nl, double u_b, int samples_per_side) {
  if (samples_per_side < 1) throw std::invalid_argument("check_supersolution: need at least one sample");
  double pde_min = std::numeric_limits<double>::infinity();
  double boundary_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= samples_per_side; ++k) {
    for (int i = 0; i <= samples_per_side; ++i) {
      const Point x(static_cast<double>(i) / samples_per_side, static_cast<double>(k) / samples_per_side);
      const double value = y_b(x);
      pde_min = std::min(pde_min, neg_laplacian_y_b(x) + nl.phi(value) - u_b);
      if (i == 0 || k == 0 || i == samples_per_side || k == samples_per_side) {
        boundary_min = std::min(boundary_min, value);
      }
    }
  }
  SupersolutionResult r;
  r.passed = pde_min >= 0.0 && boundary_min >= 0.0;
  r.worst_margin = std::min(pde_min, boundary_min);
  return r;
}

}  // namespace certopt
