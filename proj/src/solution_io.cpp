#include "certopt/solution_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace certopt {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "certopt-solution-1";

json to_array(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector from_array(const json& a, const char* key) {
  if (!a.is_array()) throw std::invalid_argument(std::string("solution: '") + key + "' must be an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw std::invalid_argument(std::string("solution: '") + key + "' must hold numbers");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

void put_optional(json& doc, const char* key, const std::optional<double>& v) {
  if (v && std::isfinite(*v)) doc[key] = *v;
}

std::optional<double> get_optional(const json& doc, const char* key) {
  if (doc.contains(key) && doc.at(key).is_number()) return doc.at(key).get<double>();
  return std::nullopt;
}

}  // namespace

std::string solution_to_json(const StoredSolution& s) {
  json doc;
  doc["format"] = kFormat;
  doc["run"] = json::parse(serialize(s.run));
  doc["alpha"] = s.alpha;
  doc["n"] = s.run.n;
  doc["y"] = to_array(s.solution.y);
  doc["p"] = to_array(s.solution.p);
  doc["mu"] = to_array(s.solution.mu);
  const SolveDiagnostics& d = s.solution.diagnostics;
  doc["diagnostics"] = {{"newton_iterations", d.newton_iterations},
                        {"active_set_changes", d.active_set_changes},
                        {"line_search_failures", d.line_search_failures},
                        {"state_residual", d.state_residual},
                        {"adjoint_residual", d.adjoint_residual},
                        {"complementarity_residual", d.complementarity_residual},
                        {"converged", d.converged},
                        {"note", d.note}};
  json cert = json::object();
  put_optional(cert, "objective", s.objective);
  put_optional(cert, "norm_h_q", s.norm_h_q);
  put_optional(cert, "norm_L_q", s.norm_L_q);
  put_optional(cert, "eta", s.eta);
  put_optional(cert, "threshold_discrete", s.threshold_discrete);
  doc["values"] = cert;
  return doc.dump(1);
}

StoredSolution solution_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("solution: malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != kFormat) {
    throw std::invalid_argument("solution: not a certopt solution file");
  }
  for (const char* key : {"run", "alpha", "y", "p", "mu"}) {
    if (!doc.contains(key)) throw std::invalid_argument(std::string("solution: missing '") + key + "'");
  }
  StoredSolution s;
  s.run = parse_config(doc.at("run").dump());
  if (!doc.at("alpha").is_number()) throw std::invalid_argument("solution: 'alpha' must be a number");
  s.alpha = doc.at("alpha").get<double>();
  s.solution.y = from_array(doc.at("y"), "y");
  s.solution.p = from_array(doc.at("p"), "p");
  s.solution.mu = from_array(doc.at("mu"), "mu");
  const Eigen::Index expected = static_cast<Eigen::Index>(s.run.n + 1) * (s.run.n + 1);
  if (s.solution.y.size() != expected || s.solution.p.size() != expected || s.solution.mu.size() != expected) {
    throw std::invalid_argument("solution: nodal arrays do not match n");
  }
  if (doc.contains("diagnostics")) {
    const json& d = doc.at("diagnostics");
    SolveDiagnostics& diag = s.solution.diagnostics;
    diag.newton_iterations = d.value("newton_iterations", 0);
    diag.active_set_changes = d.value("active_set_changes", 0);
    diag.line_search_failures = d.value("line_search_failures", 0);
    diag.state_residual = d.value("state_residual", 0.0);
    diag.adjoint_residual = d.value("adjoint_residual", 0.0);
    diag.complementarity_residual = d.value("complementarity_residual", 0.0);
    diag.converged = d.value("converged", false);
    diag.note = d.value("note", "");
  }
  if (doc.contains("values")) {
    const json& v = doc.at("values");
    s.objective = get_optional(v, "objective");
    s.norm_h_q = get_optional(v, "norm_h_q");
    s.norm_L_q = get_optional(v, "norm_L_q");
    s.eta = get_optional(v, "eta");
    s.threshold_discrete = get_optional(v, "threshold_discrete");
  }
  return s;
}

void save_solution(const StoredSolution& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("save_solution: cannot open " + path.string());
  out << solution_to_json(s) << '\n';
  if (!out) throw std::runtime_error("save_solution: write failed for " + path.string());
}

StoredSolution load_solution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("solution: cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return solution_from_json(buf.str());
}

StoredSolution annotate(StoredSolution s) {
  const Mesh mesh = build_uniform_mesh(s.run.n);
  KKTSolution probe = s.solution;
  probe.diagnostics.converged = true;
  const ResultRow row = evaluate_row(s.run, s.alpha, mesh, probe);
  s.objective = row.J_value;
  s.norm_h_q = row.norm_h_q;
  s.norm_L_q = row.norm_L_q;
  s.eta = row.eta;
  s.threshold_discrete = row.threshold_discrete;
  return s;
}

}  // namespace certopt
