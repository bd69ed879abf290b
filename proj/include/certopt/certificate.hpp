#pragma once

#include <optional>
#include <string>

#include "certopt/fem.hpp"
#include "certopt/nonlinearity.hpp"
#include "certopt/solvers.hpp"

namespace certopt {

/// Defining values of the Gagliardo-Nirenberg constants that are built in:
/// C_4^{-2} and C_6^{-1}.
inline constexpr double kGn4InverseSquared = 2.381297723376159;
inline constexpr double kGn6Inverse = 1.616080082127768;

/// Gagliardo-Nirenberg constant C_t. Only t = 4 and t = 6 are built in;
/// any other t needs `override_value` (config key gn_constant_override).
double gn_constant(double t, std::optional<double> override_value = std::nullopt);

struct CertificateParams {
  double q = 2.0;
  double gamma = 0.0;
  double M = 0.0;
  double alpha = 1.0;
  int d = 2;
  double t = 0.0;    // 2 q (1 - gamma) / (q (1 - gamma) - 1)
  double rho = 0.0;  // d / (2 q) + gamma
  double C_t = 0.0;
  bool extended_d3 = false;  // d = 3 with q >= 3, admissible without state measure
};

/// Validates the admissible range of q for (gamma, d) and fills t, rho, C_t.
CertificateParams certificate_params(const Nonlinearity& nl, double q, double alpha, int d = 2,
                                     std::optional<double> gn_override = std::nullopt,
                                     bool extended_d3 = false);

/// Closed-form certification threshold eta(alpha, q, d). gamma^(-gamma) is
/// taken as 1 at gamma = 0; M = 0 gives +infinity.
double eta(const CertificateParams& params);

/// (1/4)^(1 - gamma - 1/q) eta(alpha, q, 2).
double discrete_threshold(const CertificateParams& params);

enum class Verdict { CertifiedUnique, CertifiedGlobal, Inconclusive };
enum class CertificateMethod { Lumped, ExactNorm, Sign };

std::string to_string(Verdict v);
std::string to_string(CertificateMethod m);

inline constexpr double kVerdictRelTol = 1e-14;

struct CertificateReport {
  CertificateMethod method = CertificateMethod::Lumped;
  double norm_value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  Verdict verdict = Verdict::Inconclusive;
  std::string assumptions_note;

  bool certified() const { return verdict != Verdict::Inconclusive; }
};

/// Unique if margin > tol * threshold, global if |margin| <= tol * threshold.
Verdict classify(double norm_value, double threshold, double rel_tol = kVerdictRelTol);

/// Lumped-norm criterion |p_h|_{h,q} <= (1/4)^(1-gamma-1/q) eta(alpha, q, 2).
CertificateReport certify_discrete(const Mesh& mesh, const Vector& p, const CertificateParams& params);

/// |p_h|_{L^q} <= eta(alpha, q, d) with the exactly integrated norm. For
/// non-integer q a split high-order quadrature is used if allowed.
CertificateReport certify_continuous_norm(const Mesh& mesh, const Vector& p, const CertificateParams& params,
                                          bool allow_quadrature_fallback = false);

/// Interval on which phi is claimed convex (or concave).
struct ConvexityClaim {
  double lo = -kInf;
  double hi = kInf;
  bool convex = true;
};

/// Sign criterion: p <= 0 with phi convex (p >= 0 with phi concave) on an
/// interval containing every admissible state. That range hypothesis is not
/// machine-checkable and must be asserted by the caller.
CertificateReport certify_sign(const Vector& y, const Vector& p, const ConvexityClaim& claim,
                               bool range_hypothesis_asserted, double tol = 1e-12);

struct SupersolutionResult {
  bool passed = false;
  double worst_margin = 0.0;
};

/// Checks -Laplace y_b + phi(y_b) >= u_b on a uniform grid of the closed
/// unit square and y_b >= 0 on its boundary.
SupersolutionResult check_supersolution(const ScalarField& y_b, const ScalarField& neg_laplacian_y_b,
                                        const Nonlinearity& nl, double u_b, int samples_per_side);

}  // namespace certopt
