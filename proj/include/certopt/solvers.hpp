#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "certopt/fem.hpp"
#include "certopt/problem.hpp"

namespace certopt {

struct SolverOptions {
  double tolerance = 1e-10;  // sup-norm of the residual
  int max_iterations = 100;
  int max_halvings = 30;
  double pdas_c = 1.0;
};

struct SolveDiagnostics {
  int newton_iterations = 0;
  int active_set_changes = 0;  // state-constrained case
  int line_search_failures = 0;
  double state_residual = 0.0;
  double adjoint_residual = 0.0;
  double complementarity_residual = 0.0;
  bool converged = false;
  std::string note;
};

/// Discrete stationary point. All vectors are nodal over the full mesh; y and
/// p vanish on the boundary, mu is zero off the constrained node set. The
/// control is implicit: u = clamp(-p / alpha, u_a, u_b).
struct KKTSolution {
  Vector y;
  Vector p;
  Vector mu;
  SolveDiagnostics diagnostics;
};

struct KKTResidual {
  double state = 0.0;
  double adjoint = 0.0;
  double complementarity = 0.0;

  double max() const { return std::max({state, adjoint, complementarity}); }
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, SolveDiagnostics diag)
      : std::runtime_error(what), diagnostics_(std::move(diag)) {}
  const SolveDiagnostics& diagnostics() const { return diagnostics_; }

 private:
  SolveDiagnostics diagnostics_;
};

/// Solves A y + m .* phi(y) = load on interior nodes with y = 0 on the
/// boundary. `load` is the full nodal vector (int u phi_i)_i.
Vector solve_state(const Mesh& mesh, const Nonlinearity& nl, const Vector& load,
                   const SolverOptions& options = {}, int* iterations = nullptr);

/// J_h = 1/2 int (y - y0)^2 + alpha/2 int clamp(-p/alpha)^2.
double objective(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol);

/// Semismooth Newton on the discrete optimality system; the state-constrained
/// case runs a primal-dual active set strategy inside the same loop.
/// Throws SolverFailure when the iteration does not converge.
KKTSolution solve_kkt(const ProblemSpec& spec, const Mesh& mesh,
                      const std::optional<KKTSolution>& init = std::nullopt,
                      const SolverOptions& options = {});

KKTResidual kkt_residual(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol,
                         double pdas_c = 1.0);

/// Residual map of the optimality system and its generalized Jacobian in the
/// interior unknowns z = [y_I; p_I; mu_I] (mu only with state bounds), nodes
/// in the order of Mesh::interior_vertices().
struct OptimalityMap {
  Vector residual;
  SparseMatrix jacobian;
};

OptimalityMap optimality_map(const ProblemSpec& spec, const Mesh& mesh, const KKTSolution& sol,
                             double pdas_c = 1.0);

struct MultistartRun {
  double objective = 0.0;
  bool converged = false;
  double distance = 0.0;  // max nodal |y - y_ref|, |p - p_ref|
  Vector start_y;
  Vector start_p;
};

/// Runs solve_kkt from k random starts (nodal y, p uniform in [-radius, radius],
/// mu = 0). Failures are recorded, never thrown.
std::vector<MultistartRun> multistart_probe(const ProblemSpec& spec, const Mesh& mesh, int k,
                                            double radius, std::uint64_t seed,
                                            const SolverOptions& options = {});

}  // namespace certopt
