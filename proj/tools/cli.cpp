#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "wnc/error.hpp"

namespace wnc::cli {

namespace {

constexpr const char* kVersion = "1.0.0";

json meta_document(const std::string& subcommand, const std::string& scenario_path,
                   const Scenario& s, const Context& ctx, const std::string& format, bool strict) {
  json bounds = json::array();
  for (const Row& r : ctx.rows)
    if (r.theta_star || r.prefactor) bounds.push_back(row_to_json(r));
  return json{{"tool", "wnc"},
              {"version", kVersion},
              {"subcommand", subcommand},
              {"scenario_path", scenario_path},
              {"scenario", s.source},
              {"seed", s.sim.seed},
              {"runs", s.sim.runs},
              {"horizon_slots", s.sim.horizon},
              {"warmup_slots", s.sim.warmup},
              {"threads", s.sim.threads},
              {"lambda_bits_per_slot", s.arrival.lambda},
              {"format", format},
              {"strict", strict},
              {"rows", ctx.rows.size()},
              {"checks", ctx.checks},
              {"failed_checks", ctx.failed_checks},
              {"hard_failure", ctx.hard_failure},
              {"bounds", bounds}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Capacity, delay and ordering bounds for fading channels"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string scenario_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::size_t threads = 1;
  std::string format = "csv";
  std::string trace_path;
  std::uint64_t trace_runs = 1;

  app.add_option("--scenario", scenario_path, "Scenario document (JSON)")->required();
  app.add_option("--out", out_path, "Output table; a .meta.json sidecar is written next to it");
  app.add_option("--seed", seed, "Simulation seed, overrides the scenario");
  app.add_flag("--strict", strict, "Exit with status 3 on instability, divergence or failed checks");
  app.add_option("--threads", threads, "Worker threads for simulation")->envname("WNC_THREADS")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

  for (const auto& [name, kind] : subcommands()) {
    auto* sub = app.add_subcommand(name, kind.empty() ? "bound versus simulation matrix" : "queries of kind " + kind);
    if (name == "simulate") {
      sub->add_option("--trace", trace_path, "Write a per-slot trace dump here");
      sub->add_option("--trace-runs", trace_runs, "Replicas in the trace dump");
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : invalid_input;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  try {
    Scenario scenario = load_scenario(scenario_path);
    if (seed) scenario.sim.seed = *seed;
    scenario.sim.threads = threads;
    Context ctx{scenario, {}, false, 0, 0};
    run_subcommand(subcommand, ctx);

    if (!trace_path.empty()) {
      std::ofstream trace(trace_path);
      if (!trace) throw ValidationError("--trace: cannot open '" + trace_path + "'");
      sim::write_trace_dump(trace, scenario.process, scenario.arrival.lambda, scenario.sim, trace_runs);
    }

    auto emit = [&](std::ostream& os) {
      if (format == "json")
        write_json(os, ctx.rows);
      else
        write_csv(os, ctx.rows);
    };
    if (out_path.empty()) {
      emit(out);
    } else {
      std::ofstream table(out_path);
      if (!table) throw ValidationError("--out: cannot open '" + out_path + "'");
      emit(table);
      std::ofstream meta(out_path + ".meta.json");
      meta << meta_document(subcommand, scenario_path, scenario, ctx, format, strict).dump(2) << '\n';
    }
    if (ctx.failed_checks > 0)
      err << subcommand << ": " << ctx.failed_checks << " of " << ctx.checks << " checks failed\n";
    if (strict && (ctx.hard_failure || ctx.failed_checks > 0)) return hard_failure;
    return ok;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return invalid_input;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return invalid_input;
  } catch (const NumericError& e) {
    err << "numeric failure in " << e.operation() << ": " << e.what() << '\n';
    return numeric_failure;
  } catch (const UnstableError& e) {
    err << "unstable: " << e.what() << '\n';
    return strict ? hard_failure : ok;
  }
}

}  // namespace wnc::cli
