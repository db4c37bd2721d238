#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "wnc/error.hpp"

namespace wnc::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ValidationError(path + ": " + what);
}

void only_keys(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) fail(path + "." + key, "unknown key");
}

const json& require_key(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) fail(path + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& path) {
  const double v = number(j, path);
  if (!(std::isfinite(v) && v > 0.0)) fail(path, "must be positive");
  return v;
}

std::uint64_t count(const json& j, const std::string& path, std::uint64_t min) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
    fail(path, "expected a nonnegative integer");
  const auto v = j.get<std::uint64_t>();
  if (v < min) fail(path, "must be at least " + std::to_string(min));
  return v;
}

std::vector<double> numbers(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

FadingModel parse_fading(const json& j, const std::string& path) {
  const std::string model = require_key(j, "model", path).is_string()
                                ? j.at("model").get<std::string>()
                                : (fail(path + ".model", "expected a string"), std::string());
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? number(j.at(key), path + "." + key) : fallback;
  };
  FadingModel out;
  if (model == "rayleigh") {
    only_keys(j, {"model", "sigma"}, path);
    out = Rayleigh{num("sigma", Rayleigh{}.sigma)};
  } else if (model == "rice") {
    only_keys(j, {"model", "los_amplitude", "sigma0"}, path);
    out = Rice{num("los_amplitude", Rice{}.s), num("sigma0", Rice{}.sigma0)};
  } else if (model == "nakagami") {
    only_keys(j, {"model", "m", "omega"}, path);
    out = Nakagami{num("m", Nakagami{}.m), num("omega", Nakagami{}.omega)};
  } else if (model == "weibull") {
    only_keys(j, {"model", "c", "k"}, path);
    out = Weibull{num("c", Weibull{}.c), num("k", Weibull{}.k)};
  } else if (model == "lognormal") {
    only_keys(j, {"model", "mu", "sigma"}, path);
    out = Lognormal{num("mu", Lognormal{}.mu), num("sigma", Lognormal{}.sigma)};
  } else {
    fail(path + ".model", "unknown fading model '" + model + "'");
  }
  try {
    validate(out);
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
  return out;
}

CapacityLaw parse_channel(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("discrete")) {
    only_keys(j, {"discrete"}, path);
    const json& d = j.at("discrete");
    const std::string dp = path + ".discrete";
    only_keys(d, {"capacity_bits_per_slot", "probability"}, dp);
    auto support = numbers(require_key(d, "capacity_bits_per_slot", dp), dp + ".capacity_bits_per_slot");
    auto mass = numbers(require_key(d, "probability", dp), dp + ".probability");
    if (support.size() != mass.size()) fail(dp, "capacity_bits_per_slot and probability differ in length");
    for (std::size_t i = 0; i < support.size(); ++i)
      if (!(support[i] >= 0.0)) fail(dp + ".capacity_bits_per_slot", "capacities must be nonnegative");
    try {
      return CapacityLaw(DiscreteDistribution(std::move(support), std::move(mass)));
    } catch (const ValidationError& e) {
      fail(dp, e.what());
    }
  }
  only_keys(j, {"bandwidth_hz", "snr_linear", "fading", "subchannels"}, path);
  ChannelSpec spec{positive(require_key(j, "bandwidth_hz", path), path + ".bandwidth_hz"),
                   positive(require_key(j, "snr_linear", path), path + ".snr_linear")};
  if (j.contains("subchannels")) {
    if (j.contains("fading")) fail(path, "give either fading or subchannels");
    const json& subs = j.at("subchannels");
    if (!subs.is_array() || subs.empty()) fail(path + ".subchannels", "expected a nonempty array");
    std::vector<Subchannel> list;
    for (std::size_t i = 0; i < subs.size(); ++i) {
      const std::string sp = path + ".subchannels[" + std::to_string(i) + "]";
      only_keys(subs[i], {"bandwidth_hz", "snr_linear", "fading"}, sp);
      list.push_back({ChannelSpec{positive(require_key(subs[i], "bandwidth_hz", sp), sp + ".bandwidth_hz"),
                                  positive(require_key(subs[i], "snr_linear", sp), sp + ".snr_linear")},
                      parse_fading(require_key(subs[i], "fading", sp), sp + ".fading")});
    }
    return CapacityLaw(spec, FrequencySelective::make(std::move(list)));
  }
  return CapacityLaw(spec, parse_fading(require_key(j, "fading", path), path + ".fading"));
}

MarkovAdditive parse_markov(const json& j, const std::string& path) {
  only_keys(j, {"transition", "states", "labels", "attachment", "initial_state"}, path);
  const json& rows = require_key(j, "transition", path);
  if (!rows.is_array() || rows.empty()) fail(path + ".transition", "expected a square matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = numbers(rows[i], path + ".transition[" + std::to_string(i) + "]");
    if (static_cast<Eigen::Index>(row.size()) != n) fail(path + ".transition", "expected a square matrix");
    for (Eigen::Index k = 0; k < n; ++k) p(i, k) = row[k];
  }
  const json& states = require_key(j, "states", path);
  if (!states.is_array()) fail(path + ".states", "expected an array of channels");
  std::vector<CapacityLaw> laws;
  for (std::size_t i = 0; i < states.size(); ++i)
    laws.push_back(parse_channel(states[i], path + ".states[" + std::to_string(i) + "]"));
  Attachment attach = Attachment::destination;
  if (j.contains("attachment")) {
    const std::string a = j.at("attachment").is_string() ? j.at("attachment").get<std::string>() : "";
    if (a == "destination")
      attach = Attachment::destination;
    else if (a == "source")
      attach = Attachment::source;
    else if (a == "transition")
      attach = Attachment::transition;
    else
      fail(path + ".attachment", "expected destination, source or transition");
  }
  std::vector<std::string> labels;
  if (j.contains("labels")) {
    if (!j.at("labels").is_array()) fail(path + ".labels", "expected an array of strings");
    for (const auto& l : j.at("labels")) {
      if (!l.is_string()) fail(path + ".labels", "expected an array of strings");
      labels.push_back(l.get<std::string>());
    }
  }
  MarkovAdditive out{[&] {
    try {
      return MarkovKernel(p, laws, attach, labels);
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  }(), std::nullopt};
  if (j.contains("initial_state") && !j.at("initial_state").is_null()) {
    const auto s = count(j.at("initial_state"), path + ".initial_state", 0);
    if (s >= out.kernel.size()) fail(path + ".initial_state", "out of range");
    out.initial_state = s;
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& query_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"cdf", {"kind", "x_bits_per_slot", "probability", "theta"}},
      {"tail", {"kind", "t_slots", "x_bits_per_slot", "mc"}},
      {"delay", {"kind", "d_slots", "mc", "horizon_slots"}},
      {"dcc", {"kind", "d_slots", "epsilon"}},
      {"order", {"kind", "t_slots", "d_slots"}},
      {"interference", {"kind", "hops", "k", "shared_channel", "d_slots", "mc"}},
      {"simulate", {"kind", "d_slots", "t_slots", "x_bits_per_slot"}},
  };
  return keys;
}

}  // namespace

const std::vector<std::string>& query_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : query_keys()) out.push_back(k);
    return out;
  }();
  return kinds;
}

Scenario parse_scenario(const json& doc) {
  only_keys(doc, {"channel", "process", "arrival", "sim", "queries"}, "scenario");
  Scenario s;
  s.source = doc;
  if (doc.contains("channel")) s.channel = parse_channel(doc.at("channel"), "channel");

  std::string structure = "additive";
  const json process = doc.value("process", json::object());
  only_keys(process, {"structure", "markov"}, "process");
  if (process.contains("structure")) {
    if (!process.at("structure").is_string()) fail("process.structure", "expected a string");
    structure = process.at("structure").get<std::string>();
  }
  if (structure == "markov") {
    s.process = parse_markov(require_key(process, "markov", "process"), "process.markov");
  } else {
    if (process.contains("markov")) fail("process.markov", "only valid with structure markov");
    if (!s.channel) fail("channel", "missing (required unless the structure is markov)");
    if (structure == "additive")
      s.process = Additive{*s.channel};
    else if (structure == "comonotonic")
      s.process = Comonotonic{*s.channel};
    else if (structure == "antithetic")
      s.process = Antithetic{*s.channel};
    else
      fail("process.structure", "expected additive, comonotonic, antithetic or markov");
  }

  const json arrival = doc.value("arrival", json::object());
  only_keys(arrival, {"lambda_bits_per_slot"}, "arrival");
  if (arrival.contains("lambda_bits_per_slot"))
    s.arrival.lambda = positive(arrival.at("lambda_bits_per_slot"), "arrival.lambda_bits_per_slot");

  const json sim = doc.value("sim", json::object());
  only_keys(sim, {"seed", "runs", "horizon_slots", "warmup_slots"}, "sim");
  if (sim.contains("seed")) s.sim.seed = count(sim.at("seed"), "sim.seed", 0);
  if (sim.contains("runs")) s.sim.runs = count(sim.at("runs"), "sim.runs", 1);
  if (sim.contains("horizon_slots")) s.sim.horizon = count(sim.at("horizon_slots"), "sim.horizon_slots", 1);
  s.sim.warmup = sim.contains("warmup_slots") ? count(sim.at("warmup_slots"), "sim.warmup_slots", 0)
                                              : s.sim.horizon / 10;
  if (s.sim.warmup >= s.sim.horizon) fail("sim.warmup_slots", "must be below horizon_slots");

  const json queries = doc.value("queries", json::array());
  if (!queries.is_array()) fail("queries", "expected an array");
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const std::string path = "queries[" + std::to_string(i) + "]";
    const json& q = queries[i];
    if (!q.is_object() || !q.contains("kind") || !q.at("kind").is_string())
      fail(path + ".kind", "missing or not a string");
    const std::string kind = q.at("kind").get<std::string>();
    const auto it = query_keys().find(kind);
    if (it == query_keys().end()) fail(path + ".kind", "unknown query kind '" + kind + "'");
    only_keys(q, it->second, path);
    s.queries.push_back({kind, q});
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("scenario: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("scenario: " + std::string(e.what()));
  }
  return parse_scenario(doc);
}

double get_number(const json& params, const std::string& key, double fallback, const std::string& path) {
  return params.contains(key) ? number(params.at(key), path + "." + key) : fallback;
}

bool get_bool(const json& params, const std::string& key, bool fallback, const std::string& path) {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_boolean()) fail(path + "." + key, "expected true or false");
  return params.at(key).get<bool>();
}

std::vector<double> get_numbers(const json& params, const std::string& key,
                                std::vector<double> fallback, const std::string& path) {
  return params.contains(key) ? numbers(params.at(key), path + "." + key) : fallback;
}

}  // namespace wnc::cli
