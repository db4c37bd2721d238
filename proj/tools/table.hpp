#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace wnc::cli {

/// One output row. Bound rows carry theta*, prefactor and horizon so each
/// number can be traced to its formula.
struct Row {
  std::string query;
  std::string kind;
  std::string quantity;
  std::optional<double> argument;
  double value = 0.0;
  std::optional<double> theta_star;
  std::optional<double> prefactor;
  std::optional<double> horizon;
  std::string check;  // pass, fail or a verdict; empty when nothing is checked
  std::string notes;
};

/// Shortest decimal text that round-trips: 17 significant digits.
std::string format_number(double v);

void write_csv(std::ostream& os, const std::vector<Row>& rows);
void write_json(std::ostream& os, const std::vector<Row>& rows);
nlohmann::json row_to_json(const Row& row);

}  // namespace wnc::cli
