#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "certopt/certificate.hpp"
#include "certopt/problem.hpp"
#include "certopt/solvers.hpp"

namespace certopt {

/// Case 1: no bounds. Case 2: u_b = -u_a = 5. Case 3: y_b = -y_a = 1 on the
/// closed domain.
enum class ControlCase { Unconstrained = 1, ControlConstrained = 2, StateConstrained = 3 };
enum class NormMode { Lumped, Exact, Both };

std::string to_string(NormMode m);

struct NonlinearityDescriptor {
  NonlinearityKind kind = NonlinearityKind::PowerLaw;
  double a = 1.0;
  double p_exp = 3.0;

  bool operator==(const NonlinearityDescriptor&) const = default;
};

Nonlinearity make_nonlinearity(const NonlinearityDescriptor& d);

struct MultistartSpec {
  int k = 10;
  double radius = 5.0;
  std::uint64_t seed = 1;

  bool operator==(const MultistartSpec&) const = default;
};

struct RunSpec {
  NonlinearityDescriptor phi;
  Scenario scenario = Scenario::A1;
  double y0_constant = 0.0;  // desired state of the custom scenario
  ControlCase problem_case = ControlCase::Unconstrained;
  std::vector<double> alphas;
  int n = 32;
  double q = 2.0;
  NormMode norm = NormMode::Both;
  std::optional<MultistartSpec> multistart;
  std::string out;
  bool warm_start = true;
  std::optional<double> gn_constant_override;
  // Overrides of the case defaults (constant bounds).
  std::optional<double> u_a, u_b, y_a, y_b;

  bool operator==(const RunSpec&) const = default;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses a flat JSON document. Required keys: phi, scenario, case, alphas, q.
/// Throws ConfigError naming the offending field.
RunSpec parse_config(std::string_view json_text);
RunSpec load_config(const std::filesystem::path& path);
std::string serialize(const RunSpec& spec);

/// Throws ConfigError on invalid combinations.
void validate(const RunSpec& spec);

/// Problem instance for one alpha of a run.
ProblemSpec make_problem(const RunSpec& spec, double alpha);

struct ResultRow {
  double alpha = 0.0;
  int problem_case = 1;
  std::string scenario;
  double q = 0.0;
  double gamma = 0.0;
  double M = 0.0;
  double t = 0.0;
  double rho = 0.0;
  double C_t = 0.0;
  double eta = 0.0;
  double threshold_discrete = 0.0;
  double norm_h_q = 0.0;
  double norm_L_q = 0.0;
  bool certified_discrete = false;
  bool certified_continuous = false;
  double margin_discrete = 0.0;
  double margin_continuous = 0.0;
  double J_value = 0.0;
  double kkt_residual = 0.0;
  int newton_iterations = 0;
  int pdas_iterations = 0;
  bool converged = false;
};

struct MultistartRow {
  double alpha = 0.0;
  int start = 0;
  double objective = 0.0;
  bool converged = false;
  double distance = 0.0;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<KKTSolution> solutions;  // aligned with rows; empty vectors on failure
  std::vector<MultistartRow> multistart;
};

/// One row per alpha, in the order of spec.alphas. With warm starting the
/// alphas are solved in descending order, each from the previous solution.
SweepResult run_sweep(const RunSpec& spec, const SolverOptions& options = {});

/// Certificates and diagnostics for an already computed solution.
ResultRow evaluate_row(const RunSpec& spec, double alpha, const Mesh& mesh, const KKTSolution& sol,
                       const SolverOptions& options = {});

const std::vector<std::string>& result_header();
std::string to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void write_multistart_csv(const std::vector<MultistartRow>& rows, const std::filesystem::path& path);

/// Worker count for concurrent rows, from CERTOPT_THREADS (default 1).
int thread_budget();

}  // namespace certopt
