#include "certopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace certopt {

namespace {

using nlohmann::json;

constexpr double kCase2ControlBound = 5.0;
constexpr double kCase3StateBound = 1.0;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "phi",         "phi_a",          "phi_p",          "scenario",         "y0_constant",
      "case",        "alphas",         "n",              "q",                "norm",
      "out",         "multistart_k",   "multistart_radius", "multistart_seed", "warm_start",
      "gn_constant_override", "u_a",   "u_b",            "y_a",              "y_b"};
  return keys;
}

double number_field(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw ConfigError("config field '" + key + "': expected a number");
}

int int_field(const json& doc, const std::string& key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer()) throw ConfigError("config field '" + key + "': expected an integer");
  return v.get<int>();
}

json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return v;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(NormMode m) {
  switch (m) {
    case NormMode::Lumped: return "lumped";
    case NormMode::Exact: return "exact";
    case NormMode::Both: return "both";
  }
  return "unknown";
}

Nonlinearity make_nonlinearity(const NonlinearityDescriptor& d) {
  switch (d.kind) {
    case NonlinearityKind::PowerLaw: return make_power_law(d.a, d.p_exp);
    case NonlinearityKind::Exponential: return make_exponential(d.a);
    case NonlinearityKind::Custom: break;
  }
  throw ConfigError("config field 'phi': custom nonlinearities cannot be described in a config file");
}

void validate(const RunSpec& spec) {
  if (spec.alphas.empty()) throw ConfigError("config field 'alphas': list must not be empty");
  for (double a : spec.alphas) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("config field 'alphas': values must be positive");
  }
  if (spec.n < 1) throw ConfigError("config field 'n': must be >= 1");
  if (!(spec.q > 1.0) || !std::isfinite(spec.q)) throw ConfigError("config field 'q': must be > 1");
  if (spec.phi.kind == NonlinearityKind::PowerLaw) {
    if (!(spec.phi.a >= 0.0)) throw ConfigError("config field 'phi_a': must be >= 0");
    if (!(spec.phi.p_exp >= 3.0)) throw ConfigError("config field 'phi_p': must be >= 3");
  }
  if (spec.multistart) {
    if (spec.multistart->k < 1) throw ConfigError("config field 'multistart_k': must be >= 1");
    if (!(spec.multistart->radius >= 0.0)) throw ConfigError("config field 'multistart_radius': must be >= 0");
  }
  if (spec.gn_constant_override && !(*spec.gn_constant_override > 0.0)) {
    throw ConfigError("config field 'gn_constant_override': must be positive");
  }
  const double ua = spec.u_a.value_or(-kInf);
  const double ub = spec.u_b.value_or(kInf);
  if (!(ua <= ub)) throw ConfigError("config fields 'u_a', 'u_b': require u_a <= u_b");
  if (spec.y_a || spec.y_b) {
    const double ya = spec.y_a.value_or(-kCase3StateBound);
    const double yb = spec.y_b.value_or(kCase3StateBound);
    if (!(ya < 0.0 && 0.0 < yb)) throw ConfigError("config fields 'y_a', 'y_b': require y_a < 0 < y_b");
  }
}

RunSpec parse_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().contains(key)) throw ConfigError("config: unknown key '" + key + "'");
  }
  for (const char* key : {"phi", "scenario", "case", "alphas", "q"}) {
    if (!doc.contains(key)) throw ConfigError(std::string("config: missing required key '") + key + "'");
  }

  RunSpec spec;
  try {
    const std::string phi = doc.at("phi").get<std::string>();
    if (phi == "power") {
      spec.phi.kind = NonlinearityKind::PowerLaw;
    } else if (phi == "exponential") {
      spec.phi.kind = NonlinearityKind::Exponential;
    } else {
      throw ConfigError("config field 'phi': expected 'power' or 'exponential'");
    }
  } catch (const json::type_error&) {
    throw ConfigError("config field 'phi': expected a string");
  }
  if (doc.contains("phi_a")) spec.phi.a = number_field(doc, "phi_a");
  if (doc.contains("phi_p")) spec.phi.p_exp = number_field(doc, "phi_p");

  if (!doc.at("scenario").is_string()) throw ConfigError("config field 'scenario': expected a string");
  try {
    spec.scenario = scenario_from_string(doc.at("scenario").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config field 'scenario': ") + e.what());
  }
  if (doc.contains("y0_constant")) spec.y0_constant = number_field(doc, "y0_constant");

  const int c = int_field(doc, "case");
  if (c < 1 || c > 3) throw ConfigError("config field 'case': expected 1, 2 or 3");
  spec.problem_case = static_cast<ControlCase>(c);

  const json& alphas = doc.at("alphas");
  if (!alphas.is_array()) throw ConfigError("config field 'alphas': expected an array of numbers");
  for (const json& a : alphas) {
    if (!a.is_number()) throw ConfigError("config field 'alphas': expected an array of numbers");
    spec.alphas.push_back(a.get<double>());
  }

  spec.q = number_field(doc, "q");
  if (doc.contains("n")) spec.n = int_field(doc, "n");
  if (doc.contains("norm")) {
    const json& v = doc.at("norm");
    const std::string s = v.is_string() ? v.get<std::string>() : "";
    if (s == "lumped") {
      spec.norm = NormMode::Lumped;
    } else if (s == "exact") {
      spec.norm = NormMode::Exact;
    } else if (s == "both") {
      spec.norm = NormMode::Both;
    } else {
      throw ConfigError("config field 'norm': expected lumped, exact or both");
    }
  }
  if (doc.contains("out")) {
    if (!doc.at("out").is_string()) throw ConfigError("config field 'out': expected a string");
    spec.out = doc.at("out").get<std::string>();
  }
  if (doc.contains("multistart_k") || doc.contains("multistart_radius") || doc.contains("multistart_seed")) {
    MultistartSpec ms;
    if (doc.contains("multistart_k")) ms.k = int_field(doc, "multistart_k");
    if (doc.contains("multistart_radius")) ms.radius = number_field(doc, "multistart_radius");
    if (doc.contains("multistart_seed")) {
      const json& v = doc.at("multistart_seed");
      if (!v.is_number_unsigned()) throw ConfigError("config field 'multistart_seed': expected a nonnegative integer");
      ms.seed = v.get<std::uint64_t>();
    }
    spec.multistart = ms;
  }
  if (doc.contains("warm_start")) {
    if (!doc.at("warm_start").is_boolean()) throw ConfigError("config field 'warm_start': expected true or false");
    spec.warm_start = doc.at("warm_start").get<bool>();
  }
  if (doc.contains("gn_constant_override")) spec.gn_constant_override = number_field(doc, "gn_constant_override");
  if (doc.contains("u_a")) spec.u_a = number_field(doc, "u_a");
  if (doc.contains("u_b")) spec.u_b = number_field(doc, "u_b");
  if (doc.contains("y_a")) spec.y_a = number_field(doc, "y_a");
  if (doc.contains("y_b")) spec.y_b = number_field(doc, "y_b");

  validate(spec);
  return spec;
}

RunSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize(const RunSpec& spec) {
  json doc;
  doc["phi"] = to_string(spec.phi.kind);
  doc["phi_a"] = spec.phi.a;
  doc["phi_p"] = spec.phi.p_exp;
  doc["scenario"] = to_string(spec.scenario);
  doc["y0_constant"] = spec.y0_constant;
  doc["case"] = static_cast<int>(spec.problem_case);
  doc["alphas"] = spec.alphas;
  doc["n"] = spec.n;
  doc["q"] = spec.q;
  doc["norm"] = to_string(spec.norm);
  doc["out"] = spec.out;
  doc["warm_start"] = spec.warm_start;
  if (spec.multistart) {
    doc["multistart_k"] = spec.multistart->k;
    doc["multistart_radius"] = spec.multistart->radius;
    doc["multistart_seed"] = spec.multistart->seed;
  }
  if (spec.gn_constant_override) doc["gn_constant_override"] = *spec.gn_constant_override;
  if (spec.u_a) doc["u_a"] = bound_to_json(*spec.u_a);
  if (spec.u_b) doc["u_b"] = bound_to_json(*spec.u_b);
  if (spec.y_a) doc["y_a"] = bound_to_json(*spec.y_a);
  if (spec.y_b) doc["y_b"] = bound_to_json(*spec.y_b);
  return doc.dump(2);
}

ProblemSpec make_problem(const RunSpec& spec, double alpha) {
  ProblemSpec p;
  p.n = spec.n;
  p.nonlinearity = make_nonlinearity(spec.phi);
  p.alpha = alpha;
  p.scenario = spec.scenario;
  switch (spec.scenario) {
    case Scenario::A1: p.desired_state = desired_state_a1; break;
    case Scenario::A2: p.desired_state = desired_state_a2; break;
    case Scenario::Custom: {
      const double c = spec.y0_constant;
      p.desired_state = [c](const Point&) { return c; };
      break;
    }
  }
  if (spec.problem_case == ControlCase::ControlConstrained) {
    p.control = {-kCase2ControlBound, kCase2ControlBound};
  }
  if (spec.u_a) p.control.lower = *spec.u_a;
  if (spec.u_b) p.control.upper = *spec.u_b;
  if (spec.problem_case == ControlCase::StateConstrained || spec.y_a || spec.y_b) {
    const double lo = spec.y_a.value_or(-kCase3StateBound);
    const double hi = spec.y_b.value_or(kCase3StateBound);
    p.state = StateBounds{[lo](const Point&) { return lo; }, [hi](const Point&) { return hi; }};
  }
  return p;
}

ResultRow evaluate_row(const RunSpec& spec, double alpha, const Mesh& mesh, const KKTSolution& sol,
                       const SolverOptions& options) {
  const ProblemSpec problem = make_problem(spec, alpha);
  const CertificateParams params =
      certificate_params(problem.nonlinearity, spec.q, alpha, 2, spec.gn_constant_override);

  ResultRow row;
  row.alpha = alpha;
  row.problem_case = static_cast<int>(spec.problem_case);
  row.scenario = to_string(spec.scenario);
  row.q = spec.q;
  row.gamma = params.gamma;
  row.M = params.M;
  row.t = params.t;
  row.rho = params.rho;
  row.C_t = params.C_t;
  row.eta = eta(params);
  row.threshold_discrete = discrete_threshold(params);
  row.converged = sol.diagnostics.converged;
  row.newton_iterations = sol.diagnostics.newton_iterations;
  row.pdas_iterations = sol.diagnostics.active_set_changes;

  const double nan = std::nan("");
  row.norm_h_q = row.margin_discrete = row.norm_L_q = row.margin_continuous = nan;
  row.J_value = row.kkt_residual = nan;
  if (!row.converged) return row;

  if (spec.norm != NormMode::Exact) {
    const CertificateReport disc = certify_discrete(mesh, sol.p, params);
    row.norm_h_q = disc.norm_value;
    row.margin_discrete = disc.margin;
    row.certified_discrete = disc.certified();
  }
  if (spec.norm != NormMode::Lumped) {
    const CertificateReport cont = certify_continuous_norm(mesh, sol.p, params, true);
    row.norm_L_q = cont.norm_value;
    row.margin_continuous = cont.margin;
    row.certified_continuous = cont.certified();
  }
  row.J_value = objective(problem, mesh, sol);
  row.kkt_residual = kkt_residual(problem, mesh, sol, options.pdas_c).max();
  return row;
}

SweepResult run_sweep(const RunSpec& spec, const SolverOptions& options) {
  validate(spec);
  const Mesh mesh = build_uniform_mesh(spec.n);
  // Reject inadmissible q or missing constants before any solve.
  certificate_params(make_nonlinearity(spec.phi), spec.q, spec.alphas.front(), 2, spec.gn_constant_override);

  const std::size_t count = spec.alphas.size();
  SweepResult result;
  result.rows.resize(count);
  result.solutions.resize(count);

  auto solve_one = [&](std::size_t i, const std::optional<KKTSolution>& init) {
    const double alpha = spec.alphas[i];
    const ProblemSpec problem = make_problem(spec, alpha);
    KKTSolution sol;
    try {
      sol = solve_kkt(problem, mesh, init, options);
    } catch (const SolverFailure& e) {
      sol.diagnostics = e.diagnostics();
      sol.diagnostics.converged = false;
    }
    result.rows[i] = evaluate_row(spec, alpha, mesh, sol, options);
    result.solutions[i] = std::move(sol);
  };

  if (spec.warm_start) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spec.alphas[a] > spec.alphas[b]; });
    std::optional<KKTSolution> previous;
    for (std::size_t i : order) {
      solve_one(i, previous);
      if (result.solutions[i].diagnostics.converged) previous = result.solutions[i];
    }
  } else {
    const int workers = std::min<int>(thread_budget(), static_cast<int>(count));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < count; i = next++) solve_one(i, std::nullopt);
    };
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  if (spec.multistart) {
    for (double alpha : spec.alphas) {
      const ProblemSpec problem = make_problem(spec, alpha);
      const auto runs = multistart_probe(problem, mesh, spec.multistart->k, spec.multistart->radius,
                                         spec.multistart->seed, options);
      for (std::size_t r = 0; r < runs.size(); ++r) {
        result.multistart.push_back(
            {alpha, static_cast<int>(r), runs[r].objective, runs[r].converged, runs[r].distance});
      }
    }
  }
  return result;
}

const std::vector<std::string>& result_header() {
  static const std::vector<std::string> header = {
      "alpha",          "case",           "scenario",           "q",
      "gamma",          "M",              "t",                  "rho",
      "C_t",            "eta",            "threshold_discrete", "norm_h_q",
      "norm_L_q",       "certified_discrete", "certified_continuous", "margin_discrete",
      "margin_continuous", "J_value",     "kkt_residual",       "newton_iterations",
      "pdas_iterations", "converged"};
  return header;
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  const auto& header = result_header();
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  auto b = [](bool v) { return v ? "true" : "false"; };
  for (const ResultRow& r : rows) {
    out << format_double(r.alpha) << ',' << r.problem_case << ',' << r.scenario << ',' << format_double(r.q)
        << ',' << format_double(r.gamma) << ',' << format_double(r.M) << ',' << format_double(r.t) << ','
        << format_double(r.rho) << ',' << format_double(r.C_t) << ',' << format_double(r.eta) << ','
        << format_double(r.threshold_discrete) << ',' << format_double(r.norm_h_q) << ','
        << format_double(r.norm_L_q) << ',' << b(r.certified_discrete) << ',' << b(r.certified_continuous)
        << ',' << format_double(r.margin_discrete) << ',' << format_double(r.margin_continuous) << ','
        << format_double(r.J_value) << ',' << format_double(r.kkt_residual) << ',' << r.newton_iterations
        << ',' << r.pdas_iterations << ',' << b(r.converged) << '\n';
  }
  return out.str();
}

void write_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path.string());
  out << to_csv(rows);
  if (!out) throw std::runtime_error("write_csv: write failed for " + path.string());
}

void write_multistart_csv(const std::vector<MultistartRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_multistart_csv: cannot open " + path.string());
  out << "alpha,start,objective,converged,distance\n";
  for (const MultistartRow& r : rows) {
    out << format_double(r.alpha) << ',' << r.start << ',' << format_double(r.objective) << ','
        << (r.converged ? "true" : "false") << ',' << format_double(r.distance) << '\n';
  }
  if (!out) throw std::runtime_error("write_multistart_csv: write failed for " + path.string());
}

int thread_budget() {
  if (const char* env = std::getenv("CERTOPT_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

}  // namespace certopt
