#pragma once

#include <string>
#include <vector>

#include "hapsched/radio_model.hpp"
#include "hapsched/traffic.hpp"

namespace hapsched {

struct GrantPattern {
  std::vector<double> instants;
  double hyperperiod = 0.0;
  Scheme scheme = Scheme::SemiPersistent;
};

struct DropReport {
  long long arrivals = 0;
  long long transmitted = 0;
  long long dropped = 0;
  double drop_rate = 0.0;
  std::vector<double> per_packet_delays;

  double max_access_delay() const;
};

// Continuous uses exact arrival instants; Slotted floors every arrival to the
// start of its TTI first, which is what the slot simulator observes.
enum class TimeBase { Continuous, Slotted };

// Deterministic walk over one traffic period. A packet is either sent when
// the scheme first gives it an opportunity or dropped: it is never buffered
// behind a newer packet.
//  - DS / FA: accepted iff the UE is idle; then busy for the grant latency.
//  - SPS: grants every t_pg from t = 0; each grant sends the newest pending
//    packet and drops the older ones.
//  - SRR: SPS inside the burst window, DS outside it. A burst packet still
//    pending when the window closes is superseded by the first non-burst
//    packet, which arrives exactly at the close.
DropReport drop_walk(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                     TimeBase time_base = TimeBase::Continuous);

// Closed-form burst packets sent per period under DS: every k-th of the r_b
// burst packets, k = max(1, ceil(G / t_ib)) with G the DS grant latency.
long long ds_effective_burst_count(const RadioConfig& radio, const HapticTrafficModel& haptic);
// Same with the FA gate (one TTI).
long long fa_effective_burst_count(const RadioConfig& radio, const HapticTrafficModel& haptic);

// Capacity left for background traffic in one haptic period, in bits.
double remainder_of_service(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic);

// Haptic transmissions (RB-group slots) consumed per period.
double consumed_per_period(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic);

GrantPattern grant_pattern(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic);

std::string drop_csv_header();
std::string drop_csv_row(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                         const DropReport& report);

}  // namespace hapsched
