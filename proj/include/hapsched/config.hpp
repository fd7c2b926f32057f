#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hapsched/radio_model.hpp"
#include "hapsched/snc.hpp"
#include "hapsched/traffic.hpp"

namespace hapsched {

enum class Mode { Bound, Drop, Remainder, Simulate, Sweep, Compare };
enum class SweepAxis { InterArrival, Tti };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);
std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view name);

// A duration in seconds or in TTIs; `10tti` follows the TTI through a sweep.
struct Duration {
  double value = 0.0;
  bool in_tti = false;

  static Duration seconds(double s) { return {s, false}; }
  static Duration ttis(double n) { return {n, true}; }
  double resolve(double tti) const { return in_tti ? value * tti : value; }
};

// One evaluation point of an experiment grid.
struct GridPoint {
  RadioConfig radio;
  HapticTrafficModel haptic;
};

struct ExperimentSpec {
  Mode mode = Mode::Bound;

  RadioConfig radio;  // t_sr and t_pg are overwritten from the fields below
  Duration t_sr = Duration::ttis(1.0);
  Duration t_pg = Duration::ttis(10.0);
  HapticTrafficModel haptic;
  LeftoverTrafficModel leftover;
  std::vector<Scheme> schemes{kAllSchemes.begin(), kAllSchemes.end()};

  double epsilon = 1e-5;
  OutageConvention outage_convention = OutageConvention::Violation;

  std::optional<SweepAxis> sweep_axis;
  double sweep_from = 0.0;
  double sweep_to = 0.0;
  int sweep_steps = 0;
  std::vector<double> sweep_values;  // explicit list wins over from/to/steps

  std::string output;  // empty: stdout
  std::vector<std::uint64_t> seeds{1};
  double horizon = 20.0;
  int workers = 1;

  // Fields that fell back to documented defaults without a published value.
  bool total_rate_defaulted = true;
  bool demand_defaulted = true;

  RadioConfig radio_at(double tti) const;
  std::vector<double> sweep_points() const;
  std::vector<GridPoint> grid() const;

  std::vector<std::string> violations() const;
  void validate() const;
};

// "2ms", "0.002s", "0.002" (seconds), "10tti".
Duration parse_duration(std::string_view text);
// Plain seconds; rejects the tti suffix.
double parse_seconds(std::string_view text);
// "12000", "12000bits", "1500bytes".
double parse_bits(std::string_view text);
std::vector<double> parse_seconds_list(std::string_view text);
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<Scheme> parse_scheme_list(std::string_view text);

// Key-value document with sections [radio] [haptic] [leftover] [snc]
// [experiment]. Omitted keys keep their defaults. Every problem found is
// reported in one ConfigError.
ExperimentSpec parse_config(std::istream& in, std::string_view source = "<config>");
ExperimentSpec load_config(const std::filesystem::path& path);

}  // namespace hapsched
