#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hapsched/config.hpp"
#include "hapsched/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::string> schemes;
  std::optional<std::string> seeds;
  std::optional<double> epsilon;
  std::optional<int> workers;
};

struct SweepFlags {
  std::optional<std::string> param;
  std::optional<std::string> from;
  std::optional<std::string> to;
  std::optional<int> steps;
  std::optional<std::string> values;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "INI config file (omitted: built-in defaults)")->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "CSV output path (default: stdout)");
  cmd->add_option("--scheme", flags.schemes, "Comma-separated schemes: DS,SPS,SRR,FA");
  cmd->add_option("--seed", flags.seeds, "Comma-separated RNG seeds");
  cmd->add_option("--epsilon", flags.epsilon, "Outage probability for the delay bound");
  cmd->add_option("--workers", flags.workers, "Concurrent grid points");
}

hapsched::ExperimentSpec build_spec(hapsched::Mode mode, const CommonFlags& common, const SweepFlags& sweep) {
  using namespace hapsched;
  ExperimentSpec spec;
  if (!common.config.empty()) spec = load_config(common.config);
  spec.mode = mode;

  std::vector<std::string> issues;
  const auto attempt = [&issues](std::string_view flag, auto&& apply) {
    try {
      apply();
    } catch (const std::exception& e) {
      issues.push_back(std::string(flag) + ": " + e.what());
    }
  };
  if (common.schemes) attempt("--scheme", [&] { spec.schemes = parse_scheme_list(*common.schemes); });
  if (common.seeds) attempt("--seed", [&] { spec.seeds = parse_seed_list(*common.seeds); });
  if (common.epsilon) spec.epsilon = *common.epsilon;
  if (common.workers) spec.workers = *common.workers;
  if (!common.out.empty()) spec.output = common.out;
  if (sweep.param) attempt("--param", [&] { spec.sweep_axis = parse_sweep_axis(*sweep.param); });
  if (sweep.from) attempt("--from", [&] { spec.sweep_from = parse_seconds(*sweep.from); });
  if (sweep.to) attempt("--to", [&] { spec.sweep_to = parse_seconds(*sweep.to); });
  if (sweep.steps) spec.sweep_steps = *sweep.steps;
  if (sweep.values) attempt("--values", [&] { spec.sweep_values = parse_seconds_list(*sweep.values); });
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink scheduling analysis for haptic and background traffic"};
  app.require_subcommand(1);

  CommonFlags common;
  SweepFlags sweep;
  hapsched::ExperimentOptions options;

  const std::pair<const char*, const char*> verbs[] = {
      {"bound", "Stochastic delay bound of the background flow"},
      {"drop", "Haptic drop walk over one period"},
      {"remainder", "Service left for the background flow per period"},
      {"simulate", "Slot-level simulation"},
      {"sweep", "Drop, remainder and bound over a parameter grid"},
      {"compare", "Simulation against the analytic bound and drop walk"},
  };
  for (const auto& [name, help] : verbs) {
    auto* cmd = app.add_subcommand(name, help);
    add_common(cmd, common);
    const std::string verb = name;
    if (verb == "sweep" || verb == "simulate" || verb == "compare") {
      cmd->add_option("--param", sweep.param, "Swept parameter: t_ib or tti");
      cmd->add_option("--from", sweep.from, "First grid value, e.g. 1ms");
      cmd->add_option("--to", sweep.to, "Last grid value, e.g. 3ms");
      cmd->add_option("--steps", sweep.steps, "Number of grid values (>= 2)");
      cmd->add_option("--values", sweep.values, "Explicit comma-separated grid values");
    }
    if (verb == "simulate") {
      cmd->add_option("--json", options.json_path, "Write full reports as JSON");
      cmd->add_option("--dump-arrivals", options.arrivals_path, "Write the background arrival timeline as CSV");
    }
  }

  CLI11_PARSE(app, argc, argv);

  const auto* chosen = app.get_subcommands().front();
  hapsched::ExperimentSpec spec;
  try {
    spec = build_spec(hapsched::parse_mode(chosen->get_name()), common, sweep);
    spec.validate();
  } catch (const hapsched::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return hapsched::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return hapsched::kExitConfigError;
  }

  if (spec.output.empty()) return hapsched::run_experiment(spec, std::cout, std::cerr, options);
  std::ofstream out(spec.output);
  if (!out) {
    std::cerr << "cannot write " << spec.output << '\n';
    return hapsched::kExitConfigError;
  }
  return hapsched::run_experiment(spec, out, std::cerr, options);
}
