#include "hapsched/sched_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>

namespace hapsched {

double DropReport::max_access_delay() const {
  if (per_packet_delays.empty()) return 0.0;
  return *std::max_element(per_packet_delays.begin(), per_packet_delays.end());
}

namespace {

class WalkState {
 public:
  explicit WalkState(DropReport& report) : report_(report) {}

  void transmit(double delay) {
    ++report_.transmitted;
    report_.per_packet_delays.push_back(delay);
  }
  void drop(long long n = 1) { report_.dropped += n; }

 private:
  DropReport& report_;
};

// Demand-driven acceptance: idle UE takes the packet and is blocked for
// `gate` seconds.
struct GatedUe {
  double busy_until = -1.0;

  bool offer(double t, double gate) {
    if (t < busy_until - kTimeEps) return false;
    busy_until = t + gate;
    return true;
  }
};

// Serves grouped arrivals at periodic grant instants k * t_pg.
class PeriodicGrants {
 public:
  PeriodicGrants(double t_pg, double tail) : t_pg_(t_pg), tail_(tail) {}

  long long grant_for(double t) const { return stable_ceil(t / t_pg_); }
  double instant(long long k) const { return static_cast<double>(k) * t_pg_; }

  // Queue an arrival on grant k, flushing earlier grants first.
  void offer(long long k, double t, WalkState& state) {
    if (pending_ > 0 && k != grant_) flush(state);
    grant_ = k;
    latest_ = t;
    ++pending_;
  }

  void flush(WalkState& state) {
    if (pending_ == 0) return;
    state.transmit(instant(grant_) - latest_ + tail_);
    state.drop(pending_ - 1);
    pending_ = 0;
  }

  // Pending packets with no grant left: superseded.
  void discard(WalkState& state) {
    state.drop(pending_);
    pending_ = 0;
  }

 private:
  double t_pg_;
  double tail_;
  long long grant_ = -1;
  double latest_ = 0.0;
  long long pending_ = 0;
};

}  // namespace

DropReport drop_walk(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                     TimeBase time_base) {
  radio.validate();
  HapticTrafficModel one_period = haptic;
  one_period.worst_case_excess_burst = false;
  one_period.validate();

  auto timeline = haptic_arrivals(one_period, haptic.t_p);
  if (time_base == TimeBase::Slotted) {
    for (auto& a : timeline.arrivals) {
      a.time = static_cast<double>(stable_floor(a.time / radio.tti)) * radio.tti;
    }
  }

  DropReport report;
  report.arrivals = static_cast<long long>(timeline.size());
  WalkState state(report);

  const double tail = 4.0 * radio.tti;
  const double ds_gate = ds_grant_latency(radio);
  const double ds_delay = haptic_access_delay(Scheme::DynamicScheduling, radio);

  switch (scheme) {
    case Scheme::DynamicScheduling:
    case Scheme::FastUplink: {
      const bool ds = scheme == Scheme::DynamicScheduling;
      const double gate = ds ? ds_gate : fa_grant_latency(radio);
      const double delay = haptic_access_delay(scheme, radio);
      GatedUe ue;
      for (const auto& a : timeline.arrivals) {
        if (ue.offer(a.time, gate)) {
          state.transmit(delay);
        } else {
          state.drop();
        }
      }
      break;
    }
    case Scheme::SemiPersistent: {
      PeriodicGrants grants(radio.t_pg, tail);
      for (const auto& a : timeline.arrivals) grants.offer(grants.grant_for(a.time), a.time, state);
      grants.flush(state);
      break;
    }
    case Scheme::SoftResourceReservation: {
      PeriodicGrants grants(radio.t_pg, tail);
      GatedUe ue;
      // Arrivals of one period, so the window is [0, t_b).
      const double window_end = haptic.t_b;
      for (const auto& a : timeline.arrivals) {
        if (a.time < window_end - kTimeEps) {
          const auto k = grants.grant_for(a.time);
          if (grants.instant(k) < window_end - kTimeEps) {
            grants.offer(k, a.time, state);
          } else {
            grants.flush(state);
            state.drop();
          }
          continue;
        }
        grants.flush(state);
        if (ue.offer(a.time, ds_gate)) {
          state.transmit(ds_delay);
        } else {
          state.drop();
        }
      }
      grants.flush(state);
      break;
    }
  }

  report.drop_rate = report.arrivals == 0
                         ? 0.0
                         : static_cast<double>(report.dropped) / static_cast<double>(report.arrivals);
  return report;
}

namespace {

long long effective_burst_count(double gate, const HapticTrafficModel& haptic) {
  haptic.validate();
  const long long k = std::max<long long>(1, stable_ceil(gate / haptic.t_ib));
  const long long r_b = counters(haptic, haptic.t_p).r_b;
  return (r_b + k - 1) / k;
}

}  // namespace

long long ds_effective_burst_count(const RadioConfig& radio, const HapticTrafficModel& haptic) {
  return effective_burst_count(ds_grant_latency(radio), haptic);
}

long long fa_effective_burst_count(const RadioConfig& radio, const HapticTrafficModel& haptic) {
  return effective_burst_count(fa_grant_latency(radio), haptic);
}

double consumed_per_period(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic) {
  radio.validate();
  haptic.validate();
  const auto c = counters(haptic, haptic.t_p);
  switch (scheme) {
    case Scheme::DynamicScheduling:
    case Scheme::FastUplink:
      return static_cast<double>(drop_walk(scheme, radio, haptic).transmitted);
    case Scheme::SemiPersistent:
      return static_cast<double>(stable_floor(haptic.t_p / radio.t_pg));
    case Scheme::SoftResourceReservation:
      return static_cast<double>(stable_floor(haptic.t_b / radio.t_pg) + c.r_nb);
  }
  return 0.0;
}

double remainder_of_service(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic) {
  const int m = m_blocks(radio);
  const double haptic_bits = m * radio.channel_rate() * radio.tti * consumed_per_period(scheme, radio, haptic);
  return radio.total_rate * haptic.t_p - haptic_bits;
}

GrantPattern grant_pattern(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic) {
  radio.validate();
  haptic.validate();
  GrantPattern pattern;
  pattern.scheme = scheme;
  pattern.hyperperiod = haptic.t_p;
  if (scheme == Scheme::DynamicScheduling || scheme == Scheme::FastUplink) return pattern;

  // Hyperperiod on a nanosecond lattice.
  const auto to_ns = [](double t) { return static_cast<std::int64_t>(std::llround(t * 1e9)); };
  const std::int64_t period_ns = to_ns(haptic.t_p);
  const std::int64_t pg_ns = to_ns(radio.t_pg);
  const std::int64_t hyper_ns = std::lcm(period_ns, pg_ns);
  if (hyper_ns <= 0 || hyper_ns / period_ns > 100000) {
    throw ConfigError(fmt::format("grant pattern: hyperperiod of t_p={} s and t_pg={} s is too long",
                                  haptic.t_p, radio.t_pg));
  }
  pattern.hyperperiod = static_cast<double>(hyper_ns) * 1e-9;

  const long long count = hyper_ns / pg_ns;
  for (long long k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * radio.t_pg;
    if (scheme == Scheme::SoftResourceReservation && !haptic.in_burst(t)) continue;
    pattern.instants.push_back(t);
  }
  return pattern;
}

std::string drop_csv_header() {
  return "scheme,tti_s,t_ib_s,arrivals,transmitted,dropped,drop_rate,max_access_delay_s";
}

std::string drop_csv_row(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                         const DropReport& report) {
  return fmt::format("{},{:.9f},{:.9f},{},{},{},{:.9f},{:.9f}", to_string(scheme), radio.tti, haptic.t_ib,
                     report.arrivals, report.transmitted, report.dropped, report.drop_rate,
                     report.max_access_delay());
}

}  // namespace hapsched
