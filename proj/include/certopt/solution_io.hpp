#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "certopt/harness.hpp"

namespace certopt {

/// Solution file: a JSON document holding the run echo, alpha, nodal arrays
/// y/p/mu, solver diagnostics and the certificate values at the run's q.
struct StoredSolution {
  RunSpec run;
  double alpha = 1.0;
  KKTSolution solution;
  std::optional<double> objective;
  std::optional<double> norm_h_q;
  std::optional<double> norm_L_q;
  std::optional<double> eta;
  std::optional<double> threshold_discrete;
};

std::string solution_to_json(const StoredSolution& s);
StoredSolution solution_from_json(const std::string& text);

void save_solution(const StoredSolution& s, const std::filesystem::path& path);
StoredSolution load_solution(const std::filesystem::path& path);

/// Fills objective and certificate fields from the stored arrays.
StoredSolution annotate(StoredSolution s);

}  // namespace certopt
