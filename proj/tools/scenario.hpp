#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wnc/delay.hpp"
#include "wnc/processes.hpp"
#include "wnc/simulate.hpp"

namespace wnc::cli {

using nlohmann::json;

/// One entry of the scenario's query list. Parameters are validated against
/// the key set of their kind when the scenario is loaded.
struct Query {
  std::string kind;
  json params;
};

struct Scenario {
  json source;  // the document as read
  std::optional<CapacityLaw> channel;
  CapacityProcess process = Additive{CapacityLaw::point_mass(1.0)};
  ArrivalSpec arrival;
  sim::SimConfig sim;
  std::vector<Query> queries;
};

/// Throws ValidationError naming the offending key path.
Scenario parse_scenario(const json& doc);
Scenario load_scenario(const std::string& path);

/// Query kinds and their allowed parameter keys.
const std::vector<std::string>& query_kinds();

/// Parameter accessors with defaults; the path names the field in errors.
double get_number(const json& params, const std::string& key, double fallback, const std::string& path);
bool get_bool(const json& params, const std::string& key, bool fallback, const std::string& path);
std::vector<double> get_numbers(const json& params, const std::string& key,
                                std::vector<double> fallback, const std::string& path);

}  // namespace wnc::cli
