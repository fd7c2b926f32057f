#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hapsched/radio_model.hpp"
#include "hapsched/traffic.hpp"

namespace hapsched {

struct SimConfig {
  RadioConfig radio;
  HapticTrafficModel haptic;
  LeftoverTrafficModel leftover;
  Scheme scheme = Scheme::DynamicScheduling;
  double horizon = 20.0;
  std::uint64_t seed = 1;

  // Horizon and all scheduling periods must sit on the TTI lattice.
  std::vector<std::string> violations() const;
  void validate() const;

  long long slots() const;
};

// Haptic bookkeeping for one traffic period.
struct PeriodTally {
  long long arrivals = 0;
  long long transmitted = 0;
  long long dropped = 0;
  long long occupied_slots = 0;

  friend bool operator==(const PeriodTally&, const PeriodTally&) = default;
};

struct SimReport {
  std::uint64_t seed = 0;
  long long slots_simulated = 0;

  double haptic_drop_rate = 0.0;
  std::vector<double> haptic_delays;
  // Whole periods after warm-up.
  std::vector<PeriodTally> periods;
  double remainder_bits_per_period = 0.0;

  // Arrival to last bit served, per background packet.
  std::vector<double> leftover_delays;
  // Arrival to first bit served.
  std::vector<double> leftover_waits;
  double leftover_bits_served = 0.0;
  double leftover_capacity_bits = 0.0;
  long long leftover_unfinished = 0;

  // Slots that two haptic transmissions tried to occupy; always 0.
  long long occupancy_conflicts = 0;

  double haptic_delay_max() const;
};

// Runs one slot-accurate replay with Poisson background traffic drawn from
// config.leftover and config.seed.
SimReport run(const SimConfig& config);
// Same, with an explicit background timeline.
SimReport run(const SimConfig& config, const ArrivalTimeline& leftover);

// Nearest-rank quantile: the ceil(p n)-th smallest sample.
double empirical_quantile(std::span<const double> samples, double p);

// Compares per-period haptic counts of the simulator with the slotted walk.
// Mismatches are written to `log` when given.
bool validate_against_walk(const SimConfig& config, std::ostream* log = nullptr);

nlohmann::json to_json(const SimReport& report);

std::string sim_csv_header();
std::string sim_csv_row(const SimConfig& config, const SimReport& report);

}  // namespace hapsched
