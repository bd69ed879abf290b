// certopt: alpha sweeps, single solves and certificate evaluation for
// semilinear elliptic optimal control problems.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "certopt/certificate.hpp"
#include "certopt/harness.hpp"
#include "certopt/solution_io.hpp"

namespace {

using nlohmann::json;
using namespace certopt;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

struct RunFlags {
  std::string config;
  std::string phi;
  std::string phi_a;
  std::string phi_p;
  std::string scenario;
  std::string problem_case;
  std::string alphas;
  std::string n;
  std::string q;
  std::string norm;
  std::string out;
  std::string multistart;
  std::string radius;
  std::string seed;
  std::string gn_override;
  bool no_warm_start = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config, "JSON run configuration");
    app.add_option("--phi", phi, "nonlinearity family: power | exponential");
    app.add_option("--phi-a", phi_a, "coefficient a");
    app.add_option("--phi-p", phi_p, "power-law exponent p >= 3");
    app.add_option("--scenario", scenario, "desired state: A1 | A2");
    app.add_option("--case", problem_case, "1 unconstrained, 2 control bounds, 3 state bounds");
    app.add_option("--alphas", alphas, "comma-separated Tikhonov weights");
    app.add_option("--n", n, "subdivisions per side (default 32)");
    app.add_option("--q", q, "certification norm index");
    app.add_option("--norm", norm, "lumped | exact | both");
    app.add_option("--out", out, "output path");
    app.add_option("--multistart", multistart, "number of random starts per alpha");
    app.add_option("--radius", radius, "multistart radius");
    app.add_option("--seed", seed, "multistart seed");
    app.add_option("--gn-constant-override", gn_override, "Gagliardo-Nirenberg constant C_t");
    app.add_flag("--no-warm-start", no_warm_start, "solve every alpha from zero");
  }
};

double parse_number(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("option '" + field + "': malformed number '" + text + "'");
  }
}

long long parse_integer(const std::string& text, const std::string& field) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("option '" + field + "': malformed integer '" + text + "'");
  }
}

/// Config file (if any) overlaid with the inline flags, validated through
/// the same parser as config files.
RunSpec build_run_spec(const RunFlags& f) {
  json doc = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("config: cannot read " + f.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
  }
  if (!f.phi.empty()) doc["phi"] = f.phi;
  if (!f.phi_a.empty()) doc["phi_a"] = parse_number(f.phi_a, "--phi-a");
  if (!f.phi_p.empty()) doc["phi_p"] = parse_number(f.phi_p, "--phi-p");
  if (!f.scenario.empty()) doc["scenario"] = f.scenario;
  if (!f.problem_case.empty()) doc["case"] = parse_integer(f.problem_case, "--case");
  if (!f.alphas.empty()) {
    json list = json::array();
    std::stringstream ss(f.alphas);
    std::string item;
    while (std::getline(ss, item, ',')) list.push_back(parse_number(item, "--alphas"));
    doc["alphas"] = list;
  }
  if (!f.n.empty()) doc["n"] = parse_integer(f.n, "--n");
  if (!f.q.empty()) doc["q"] = parse_number(f.q, "--q");
  if (!f.norm.empty()) doc["norm"] = f.norm;
  if (!f.out.empty()) doc["out"] = f.out;
  if (!f.multistart.empty()) doc["multistart_k"] = parse_integer(f.multistart, "--multistart");
  if (!f.radius.empty()) doc["multistart_radius"] = parse_number(f.radius, "--radius");
  if (!f.seed.empty()) {
    const long long s = parse_integer(f.seed, "--seed");
    if (s < 0) throw ConfigError("option '--seed': must be nonnegative");
    doc["multistart_seed"] = static_cast<unsigned long long>(s);
  }
  if (!f.gn_override.empty()) doc["gn_constant_override"] = parse_number(f.gn_override, "--gn-constant-override");
  if (f.no_warm_start) doc["warm_start"] = false;
  return parse_config(doc.dump());
}

void print_report(const CertificateReport& r) {
  std::printf("%-10s norm=%.17g threshold=%.17g margin=%.17g verdict=%s\n", to_string(r.method).c_str(),
              r.norm_value, r.threshold, r.margin, to_string(r.verdict).c_str());
}

int run_sweep_command(const RunFlags& flags) {
  const RunSpec spec = build_run_spec(flags);
  const SweepResult result = run_sweep(spec);
  if (!spec.out.empty()) {
    write_csv(result.rows, spec.out);
    if (spec.multistart) write_multistart_csv(result.multistart, spec.out + ".multistart.csv");
  } else {
    std::cout << to_csv(result.rows);
  }
  bool all_converged = true;
  for (const ResultRow& r : result.rows) {
    std::fprintf(stderr, "alpha=%-8.1e converged=%s discrete=%s continuous=%s\n", r.alpha,
                 r.converged ? "yes" : "NO", r.certified_discrete ? "certified" : "inconclusive",
                 r.certified_continuous ? "certified" : "inconclusive");
    all_converged = all_converged && r.converged;
  }
  return all_converged ? kExitOk : kExitSolver;
}

int run_solve_command(const RunFlags& flags) {
  RunSpec spec = build_run_spec(flags);
  if (spec.alphas.size() != 1) throw ConfigError("option '--alphas': solve takes exactly one alpha");
  const Mesh mesh = build_uniform_mesh(spec.n);
  StoredSolution stored;
  stored.alpha = spec.alphas.front();
  stored.solution = solve_kkt(make_problem(spec, stored.alpha), mesh);
  const std::string out = spec.out;
  spec.out.clear();
  stored.run = spec;
  stored = annotate(std::move(stored));
  if (!out.empty()) {
    save_solution(stored, out);
  } else {
    std::cout << solution_to_json(stored) << '\n';
  }
  std::fprintf(stderr, "J=%.17g newton_iterations=%d\n", stored.objective.value_or(0.0),
               stored.solution.diagnostics.newton_iterations);
  return kExitOk;
}

int run_certify_command(const std::string& path, double q, const std::string& gn_override) {
  const StoredSolution stored = load_solution(path);
  const Mesh mesh = build_uniform_mesh(stored.run.n);
  const Nonlinearity nl = make_nonlinearity(stored.run.phi);
  std::optional<double> override_value = stored.run.gn_constant_override;
  if (!gn_override.empty()) override_value = parse_number(gn_override, "--gn-constant-override");
  const CertificateParams params = certificate_params(nl, q, stored.alpha, 2, override_value);
  std::printf("alpha=%.17g q=%.17g gamma=%.17g M=%.17g t=%.17g rho=%.17g C_t=%.17g eta=%.17g\n", stored.alpha,
              q, params.gamma, params.M, params.t, params.rho, params.C_t, eta(params));
  print_report(certify_discrete(mesh, stored.solution.p, params));
  print_report(certify_continuous_norm(mesh, stored.solution.p, params, true));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certopt: global optimality certificates for semilinear optimal control"};
  app.require_subcommand(1);

  RunFlags sweep_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "run an alpha sweep and write the result CSV");
  sweep_flags.attach(*sweep);

  RunFlags solve_flags;
  CLI::App* solve = app.add_subcommand("solve", "solve one instance and write the solution JSON");
  solve_flags.attach(*solve);

  std::string solution_path;
  double certify_q = 2.0;
  std::string certify_override;
  CLI::App* certify = app.add_subcommand("certify", "recompute certificates for a stored solution");
  certify->add_option("--solution", solution_path, "solution JSON")->required();
  certify->add_option("--q", certify_q, "certification norm index")->required();
  certify->add_option("--gn-constant-override", certify_override, "Gagliardo-Nirenberg constant C_t");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kExitValidation;
  }

  try {
    if (sweep->parsed()) return run_sweep_command(sweep_flags);
    if (solve->parsed()) return run_solve_command(solve_flags);
    if (certify->parsed()) return run_certify_command(solution_path, certify_q, certify_override);
  } catch (const SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}
