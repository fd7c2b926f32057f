#pragma once

#include <iosfwd>
#include <string>

#include "hapsched/config.hpp"

namespace hapsched {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitComparisonFailed = 2;

// Outage probabilities checked by `compare`.
inline constexpr double kCompareEpsilons[] = {1e-1, 1e-2};

// FNV-1a over the canonical text of every parameter that affects a row.
std::string config_hash(const GridPoint& point, const LeftoverTrafficModel& leftover, double epsilon,
                        OutageConvention convention);

struct ExperimentOptions {
  // Full simulate reports as a JSON array, when non-empty.
  std::string json_path;
  // Background arrivals of the first simulated run, as timeline CSV.
  std::string arrivals_path;
};

// Runs every grid point and scheme, writing CSV rows to `out` in grid order.
// Notes (defaults in effect, infeasible points) go to `diag`. Returns the
// process exit code.
int run_experiment(const ExperimentSpec& spec, std::ostream& out, std::ostream& diag,
                   const ExperimentOptions& options = {});

}  // namespace hapsched
