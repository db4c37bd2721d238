#include "table.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace wnc::cli {

namespace {

const char* const kColumns[] = {"query", "kind",     "quantity", "argument", "value",
                                "theta_star", "prefactor", "horizon", "check", "notes"};

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json number_or_text(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? number_or_text(*v) : nlohmann::json();
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const std::vector<Row>& rows) {
  for (std::size_t i = 0; i < std::size(kColumns); ++i) os << (i ? "," : "") << kColumns[i];
  os << '\n';
  for (const Row& r : rows) {
    os << quote(r.query) << ',' << quote(r.kind) << ',' << quote(r.quantity) << ','
       << optional_number(r.argument) << ',' << format_number(r.value) << ','
       << optional_number(r.theta_star) << ',' << optional_number(r.prefactor) << ','
       << optional_number(r.horizon) << ',' << quote(r.check) << ',' << quote(r.notes) << '\n';
  }
}

nlohmann::json row_to_json(const Row& r) {
  return nlohmann::json{{"query", r.query},
                        {"kind", r.kind},
                        {"quantity", r.quantity},
                        {"argument", optional_json(r.argument)},
                        {"value", number_or_text(r.value)},
                        {"theta_star", optional_json(r.theta_star)},
                        {"prefactor", optional_json(r.prefactor)},
                        {"horizon", optional_json(r.horizon)},
                        {"check", r.check},
                        {"notes", r.notes}};
}

void write_json(std::ostream& os, const std::vector<Row>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const Row& r : rows) out.push_back(row_to_json(r));
  os << out.dump(2) << '\n';
}

}  // namespace wnc::cli
