#include "hapsched/experiment.hpp"

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "hapsched/sched_analysis.hpp"
#include "hapsched/simulator.hpp"
#include "hapsched/snc.hpp"

namespace hapsched {

std::string config_hash(const GridPoint& point, const LeftoverTrafficModel& leftover, double epsilon,
                        OutageConvention convention) {
  const auto& r = point.radio;
  const auto& h = point.haptic;
  const std::string canonical = fmt::format(
      "n_channels={};total_rate={:.17g};tti={:.17g};t_sr={:.17g};t_pg={:.17g};haptic_demand_norm={:.17g};"
      "t_p={:.17g};t_b={:.17g};t_ib={:.17g};t_nb={:.17g};excess={};lambda_rate={:.17g};sigma={:.17g};"
      "size_distribution={};epsilon={:.17g};outage_convention={}",
      r.n_channels, r.total_rate, r.tti, r.t_sr, r.t_pg, r.haptic_demand_norm, h.t_p, h.t_b, h.t_ib, h.t_nb,
      h.worst_case_excess_burst, leftover.lambda_rate, leftover.sigma,
      leftover.size_distribution == SizeDistribution::Deterministic ? "deterministic" : "exponential_mean", epsilon,
      to_string(convention));
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

namespace {

struct TaskResult {
  std::vector<std::string> rows;
  std::vector<std::string> notes;
  std::vector<nlohmann::json> reports;
  bool comparison_failed = false;
};

// Runs tasks on up to `workers` threads; results keep task order.
std::vector<TaskResult> run_tasks(const std::vector<std::function<TaskResult()>>& tasks, int workers) {
  std::vector<TaskResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = tasks[i]();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, workers));
  if (n == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < std::min(n, tasks.size()); ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::string sweep_header() {
  return "scheme,tti_s,t_ib_s,t_pg_s,m,arrivals,transmitted,dropped,drop_rate,max_access_delay_s,"
         "remainder_bits,epsilon,theta,x_bits,d0_s,long_run_rate_bps,status,config_hash";
}

std::string compare_header() {
  return "scheme,tti_s,t_ib_s,seed,epsilon,leftover_quantile_s,d0_s,sim_drop_rate,walk_drop_rate,pass,status,"
         "config_hash";
}

TaskResult bound_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme) {
  TaskResult out;
  const auto hash = config_hash(p, spec.leftover, spec.epsilon, spec.outage_convention);
  try {
    const auto b = delay_bound(scheme, p.radio, p.haptic, spec.leftover, spec.epsilon, spec.outage_convention);
    out.rows.push_back(fmt::format("{},ok,{}", bound_csv_row(p.radio, p.haptic, b), hash));
  } catch (const InfeasibleError& e) {
    out.rows.push_back(fmt::format("{},{:.9f},{:.9f},{:.6g},,,,,infeasible,{}", to_string(scheme), p.radio.tti,
                                   p.haptic.t_ib, spec.epsilon, hash));
    out.notes.push_back(e.what());
  }
  return out;
}

TaskResult drop_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme) {
  const auto report = drop_walk(scheme, p.radio, p.haptic);
  return {{fmt::format("{},{}", drop_csv_row(scheme, p.radio, p.haptic, report),
                       config_hash(p, spec.leftover, spec.epsilon, spec.outage_convention))},
          {},
          {},
          false};
}

TaskResult remainder_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme) {
  return {{fmt::format("{},{:.9f},{:.9f},{:.6f},{}", to_string(scheme), p.radio.tti, p.haptic.t_ib,
                       remainder_of_service(scheme, p.radio, p.haptic),
                       config_hash(p, spec.leftover, spec.epsilon, spec.outage_convention))},
          {},
          {},
          false};
}

TaskResult sweep_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme) {
  TaskResult out;
  const auto hash = config_hash(p, spec.leftover, spec.epsilon, spec.outage_convention);
  const auto drop = drop_walk(scheme, p.radio, p.haptic);
  const std::string head = fmt::format(
      "{},{:.9f},{:.9f},{:.9f},{},{},{},{},{:.9f},{:.9f},{:.6f},{:.6g}", to_string(scheme), p.radio.tti, p.haptic.t_ib,
      p.radio.t_pg, m_blocks(p.radio), drop.arrivals, drop.transmitted, drop.dropped, drop.drop_rate,
      drop.max_access_delay(), remainder_of_service(scheme, p.radio, p.haptic), spec.epsilon);
  try {
    const auto b = delay_bound(scheme, p.radio, p.haptic, spec.leftover, spec.epsilon, spec.outage_convention);
    out.rows.push_back(fmt::format("{},{:.9e},{:.6f},{:.9f},{:.6f},ok,{}", head, b.theta, b.x_bits, b.d0,
                                   b.long_run_rate, hash));
  } catch (const InfeasibleError& e) {
    out.rows.push_back(fmt::format("{},,,,,infeasible,{}", head, hash));
    out.notes.push_back(e.what());
  }
  return out;
}

SimConfig sim_config(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme, std::uint64_t seed) {
  SimConfig c;
  c.radio = p.radio;
  c.haptic = p.haptic;
  c.leftover = spec.leftover;
  c.scheme = scheme;
  c.horizon = spec.horizon;
  c.seed = seed;
  return c;
}

TaskResult simulate_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme, std::uint64_t seed,
                         bool keep_json) {
  TaskResult out;
  const auto config = sim_config(spec, p, scheme, seed);
  const auto hash = config_hash(p, spec.leftover, spec.epsilon, spec.outage_convention);
  const auto report = run(config);
  out.rows.push_back(fmt::format("{},{}", sim_csv_row(config, report), hash));
  if (keep_json) {
    auto j = to_json(report);
    j["scheme"] = std::string(to_string(scheme));
    j["tti_s"] = p.radio.tti;
    j["t_ib_s"] = p.haptic.t_ib;
    j["config_hash"] = hash;
    out.reports.push_back(std::move(j));
  }
  return out;
}

TaskResult compare_task(const ExperimentSpec& spec, const GridPoint& p, Scheme scheme, std::uint64_t seed) {
  TaskResult out;
  const auto config = sim_config(spec, p, scheme, seed);
  const auto report = run(config);
  const auto walk = drop_walk(scheme, p.radio, p.haptic, TimeBase::Slotted);
  const bool drops_match = validate_against_walk(config);
  for (const double eps : kCompareEpsilons) {
    const auto hash = config_hash(p, spec.leftover, eps, spec.outage_convention);
    const auto prefix = fmt::format("{},{:.9f},{:.9f},{},{:.6g}", to_string(scheme), p.radio.tti, p.haptic.t_ib,
                                    seed, eps);
    try {
      const auto b = delay_bound(scheme, p.radio, p.haptic, spec.leftover, eps, spec.outage_convention);
      const double q = report.leftover_delays.empty() ? 0.0 : empirical_quantile(report.leftover_delays, 1.0 - eps);
      const bool pass = q <= b.d0 && drops_match;
      out.comparison_failed |= !pass;
      out.rows.push_back(fmt::format("{},{:.9f},{:.9f},{:.9f},{:.9f},{},ok,{}", prefix, q, b.d0,
                                     report.haptic_drop_rate, walk.drop_rate, pass ? "pass" : "fail", hash));
    } catch (const InfeasibleError& e) {
      out.rows.push_back(fmt::format("{},,,{:.9f},{:.9f},{},infeasible,{}", prefix, report.haptic_drop_rate,
                                     walk.drop_rate, drops_match ? "pass" : "fail", hash));
      out.comparison_failed |= !drops_match;
      out.notes.push_back(e.what());
    }
  }
  return out;
}

}  // namespace

int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& diag,
                   const ExperimentOptions& options) {
  try {
    spec.validate();
  } catch (const ConfigError& e) {
    diag << e.what() << '\n';
    return kExitConfigError;
  }

  diag << fmt::format("total_rate = {} b/s{}\n", spec.radio.total_rate,
                      spec.total_rate_defaulted ? " (default, not a published value)" : "");
  diag << fmt::format("haptic_demand_norm = {} s{}\n", spec.radio.haptic_demand_norm,
                      spec.demand_defaulted ? " (default, not a published value)" : "");

  const auto grid = spec.grid();
  std::vector<std::function<TaskResult()>> tasks;
  std::string header;
  const bool keep_json = !options.json_path.empty();

  for (const auto& point : grid) {
    for (const auto scheme : spec.schemes) {
      switch (spec.mode) {
        case Mode::Bound:
          tasks.emplace_back([&spec, point, scheme] { return bound_task(spec, point, scheme); });
          break;
        case Mode::Drop:
          tasks.emplace_back([&spec, point, scheme] { return drop_task(spec, point, scheme); });
          break;
        case Mode::Remainder:
          tasks.emplace_back([&spec, point, scheme] { return remainder_task(spec, point, scheme); });
          break;
        case Mode::Sweep:
          tasks.emplace_back([&spec, point, scheme] { return sweep_task(spec, point, scheme); });
          break;
        case Mode::Simulate:
          for (const auto seed : spec.seeds) {
            tasks.emplace_back([&spec, point, scheme, seed, keep_json] {
              return simulate_task(spec, point, scheme, seed, keep_json);
            });
          }
          break;
        case Mode::Compare:
          for (const auto seed : spec.seeds) {
            tasks.emplace_back([&spec, point, scheme, seed] { return compare_task(spec, point, scheme, seed); });
          }
          break;
      }
    }
  }

  switch (spec.mode) {
    case Mode::Bound: header = bound_csv_header() + ",status,config_hash"; break;
    case Mode::Drop: header = drop_csv_header() + ",config_hash"; break;
    case Mode::Remainder: header = "scheme,tti_s,t_ib_s,remainder_bits,config_hash"; break;
    case Mode::Sweep: header = sweep_header(); break;
    case Mode::Simulate: header = sim_csv_header() + ",config_hash"; break;
    case Mode::Compare: header = compare_header(); break;
  }

  std::vector<TaskResult> results;
  try {
    results = run_tasks(tasks, spec.workers);
  } catch (const ConfigError& e) {
    diag << e.what() << '\n';
    return kExitConfigError;
  }

  if (spec.mode == Mode::Compare) {
    out << "# compare: epsilon in {0.1, 0.01}; pass = simulated (1-epsilon) leftover delay quantile <= bound "
           "and simulated haptic drops equal the slotted walk\n";
  }
  out << header << '\n';
  bool failed = false;
  nlohmann::json reports = nlohmann::json::array();
  for (auto& r : results) {
    for (const auto& row : r.rows) out << row << '\n';
    for (const auto& note : r.notes) diag << "note: " << note << '\n';
    for (auto& j : r.reports) reports.push_back(std::move(j));
    failed |= r.comparison_failed;
  }

  if (keep_json) {
    std::ofstream json(options.json_path);
    if (!json) {
      diag << "cannot write " << options.json_path << '\n';
      return kExitConfigError;
    }
    json << reports.dump(1) << '\n';
  }
  if (!options.arrivals_path.empty() && spec.mode == Mode::Simulate && !grid.empty()) {
    std::ofstream csv(options.arrivals_path);
    if (!csv) {
      diag << "cannot write " << options.arrivals_path << '\n';
      return kExitConfigError;
    }
    const auto config = sim_config(spec, grid.front(), spec.schemes.front(), spec.seeds.front());
    write_timeline_csv(csv, leftover_arrivals(spec.leftover, static_cast<double>(config.slots()) * config.radio.tti,
                                              config.seed));
  }
  return failed ? kExitComparisonFailed : kExitOk;
}

}  // namespace hapsched
