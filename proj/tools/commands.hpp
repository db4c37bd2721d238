#pragma once

#include <string>
#include <vector>

#include "scenario.hpp"
#include "table.hpp"

namespace wnc::cli {

struct Context {
  const Scenario& scenario;
  std::vector<Row> rows;
  bool hard_failure = false;  // instability or divergence was reported
  std::size_t checks = 0;
  std::size_t failed_checks = 0;
};

/// Subcommands and the query kind each one consumes.
const std::vector<std::pair<std::string, std::string>>& subcommands();

/// Runs every query of the subcommand's kind (or one query with default
/// parameters when the scenario lists none). `validate` runs the bound
/// versus Monte Carlo matrix instead.
void run_subcommand(const std::string& name, Context& ctx);

}  // namespace wnc::cli
