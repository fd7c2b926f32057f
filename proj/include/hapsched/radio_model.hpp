#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hapsched {

// Thrown for any configuration that violates a type invariant. Carries every
// violation found, not just the first one.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  explicit ConfigError(const std::string& issue) : ConfigError(std::vector<std::string>{issue}) {}

  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

// Thrown when the haptic load leaves no stable service for the leftover flow.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Scheme {
  DynamicScheduling,
  SemiPersistent,
  SoftResourceReservation,
  FastUplink,
};

inline constexpr std::array<Scheme, 4> kAllSchemes = {
    Scheme::DynamicScheduling, Scheme::SemiPersistent,
    Scheme::SoftResourceReservation, Scheme::FastUplink};

// Short names used in files and on the command line: DS, SPS, SRR, FA.
std::string_view to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

// Time tolerance for comparing instants built from different arithmetic
// paths (k * t_ib against j * t_pg and so on). Far below the smallest TTI.
inline constexpr double kTimeEps = 1e-9;

// floor/ceil of a ratio that should be integral when it "looks" integral.
long long stable_floor(double ratio);
long long stable_ceil(double ratio);

// Uplink radio parameters. All times in seconds, rates in bit/s.
//
// haptic_demand_norm is the per-packet resource demand divided by the total
// rate, so only the ratio of the two ever enters the model.
struct RadioConfig {
  int n_channels = 10;
  double total_rate = 1e6;
  double tti = 0.5e-3;
  double t_sr = 0.5e-3;
  double t_pg = 5e-3;
  double haptic_demand_norm = 1e-4;

  // T_SR = TTI and T_pg = pg_multiple * TTI.
  static RadioConfig with_tti(double tti, double pg_multiple = 10.0);

  double channel_rate() const { return total_rate / n_channels; }

  std::vector<std::string> violations() const;
  void validate() const;
};

// Frequency blocks a haptic packet occupies in its single TTI.
int m_blocks(const RadioConfig& config);

// Worst-case uplink access delay of one haptic packet. in_burst only matters
// for soft resource reservation.
double haptic_access_delay(Scheme scheme, const RadioConfig& config, bool in_burst = true);

// SR wait + SR tx + eNB processing + grant tx: the time the UE stays unable
// to start a new request after accepting a packet under dynamic scheduling.
double ds_grant_latency(const RadioConfig& config);

// Under fast uplink the UE can start a new packet every TTI.
double fa_grant_latency(const RadioConfig& config);

}  // namespace hapsched
