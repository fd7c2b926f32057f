#include "hapsched/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>

#include "hapsched/sched_analysis.hpp"

namespace hapsched {

namespace {

// Integer number of TTIs in `t`, or -1 when t is off the lattice.
long long slot_count(double t, double tti) {
  const double ratio = t / tti;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-6) return -1;
  return static_cast<long long>(rounded);
}

long long slot_of(double t, double tti) { return stable_floor(t / tti); }

long long round_up_to(long long value, long long multiple) {
  return (value + multiple - 1) / multiple * multiple;
}

// Resource picture of the m haptic channels: sorted slots that carry haptic
// data. Everything else on those channels goes to the background flow.
class Occupancy {
 public:
  Occupancy(std::vector<long long> slots, double tti, double full_rate, double reduced_rate)
      : slots_(std::move(slots)), tti_(tti), full_rate_(full_rate), reduced_rate_(reduced_rate) {}

  const std::vector<long long>& slots() const { return slots_; }

  // Time at which `bits` are done when service starts at t. `cursor` is the
  // index of the first occupied slot not before t and only moves forward.
  double serve(double t, double bits, std::size_t& cursor) const {
    long long slot = slot_of(t, tti_);
    while (true) {
      while (cursor < slots_.size() && slots_[cursor] < slot) ++cursor;
      const bool occupied = cursor < slots_.size() && slots_[cursor] == slot;
      const double rate = occupied ? reduced_rate_ : full_rate_;
      long long end_slot = slot + 1;
      if (!occupied) {
        end_slot = cursor < slots_.size() ? slots_[cursor] : std::numeric_limits<long long>::max() / 2;
      }
      const double end = static_cast<double>(end_slot) * tti_;
      const double available = rate * std::max(0.0, end - t);
      if (rate > 0 && bits <= available) return t + bits / rate;
      bits -= available;
      t = end;
      slot = end_slot;
    }
  }

  // Background capacity offered in [t0, t1].
  double capacity(double t0, double t1) const {
    if (t1 <= t0) return 0.0;
    double occupied_time = 0.0;
    auto it = std::lower_bound(slots_.begin(), slots_.end(), slot_of(t0, tti_));
    for (; it != slots_.end(); ++it) {
      const double s0 = static_cast<double>(*it) * tti_;
      if (s0 >= t1) break;
      occupied_time += std::max(0.0, std::min(t1, s0 + tti_) - std::max(t0, s0));
    }
    return full_rate_ * (t1 - t0) - (full_rate_ - reduced_rate_) * occupied_time;
  }

 private:
  std::vector<long long> slots_;
  double tti_;
  double full_rate_;
  double reduced_rate_;
};

struct HapticOutcome {
  std::vector<PeriodTally> tallies;
  std::vector<double> delays;  // post warm-up
  std::vector<long long> tx_slots;
};

// Slot-level replay of the haptic scheduler.
class HapticReplay {
 public:
  explicit HapticReplay(const SimConfig& config)
      : config_(config),
        tti_(config.radio.tti),
        total_slots_(config.slots()),
        period_slots_(slot_count(config.haptic.t_p, tti_)),
        burst_slots_(slot_count(config.haptic.t_b, tti_)),
        pg_slots_(slot_count(config.radio.t_pg, tti_)),
        sr_slots_(slot_count(config.radio.t_sr, tti_)) {
    out_.tallies.resize(static_cast<std::size_t>(total_slots_ / period_slots_));
  }

  HapticOutcome run() {
    HapticTrafficModel model = config_.haptic;
    model.worst_case_excess_burst = false;
    const auto timeline = haptic_arrivals(model, static_cast<double>(total_slots_) * tti_);

    switch (config_.scheme) {
      case Scheme::DynamicScheduling:
        for (const auto& a : timeline.arrivals) offer_dynamic(a.time);
        break;
      case Scheme::FastUplink:
        for (const auto& a : timeline.arrivals) offer_fast(a.time);
        break;
      case Scheme::SemiPersistent:
        reserve_grants(false);
        for (const auto& a : timeline.arrivals) offer_grant(a.time, std::numeric_limits<long long>::max());
        flush();
        break;
      case Scheme::SoftResourceReservation:
        reserve_grants(true);
        for (const auto& a : timeline.arrivals) {
          const long long s = slot_of(a.time, tti_);
          const long long window_start = s / period_slots_ * period_slots_;
          if (s - window_start < burst_slots_) {
            offer_grant(a.time, window_start + burst_slots_);
          } else {
            flush();
            offer_dynamic(a.time);
          }
        }
        flush();
        break;
    }
    return std::move(out_);
  }

 private:
  PeriodTally* tally_for(long long slot) {
    const auto p = static_cast<std::size_t>(slot / period_slots_);
    return p < out_.tallies.size() ? &out_.tallies[p] : nullptr;
  }

  void arrive(long long s) {
    if (auto* t = tally_for(s)) ++t->arrivals;
  }

  void drop(long long s) {
    if (auto* t = tally_for(s)) ++t->dropped;
  }

  // Packet that arrived at time a (slot s) goes on air in tx_slot; the eNB
  // finishes decoding at the start of done_slot.
  void transmit(double a, long long s, long long tx_slot, long long done_slot, bool occupies) {
    if (auto* t = tally_for(s)) ++t->transmitted;
    if (s >= period_slots_) out_.delays.push_back(static_cast<double>(done_slot) * tti_ - a);
    if (occupies) out_.tx_slots.push_back(tx_slot);
  }

  // SR at the next opportunity after the arrival slot, then eNB processing,
  // grant, UE processing, PUSCH, eNB decoding: one TTI each.
  void offer_dynamic(double a) {
    const long long s = slot_of(a, tti_);
    arrive(s);
    if (s < ue_busy_until_) {
      drop(s);
      return;
    }
    const long long sr = round_up_to(s + 1, sr_slots_);
    ue_busy_until_ = sr + 3;
    transmit(a, s, sr + 4, sr + 6, true);
  }

  // Next TTI boundary, UE processing, PUSCH, eNB decoding.
  void offer_fast(double a) {
    const long long s = slot_of(a, tti_);
    arrive(s);
    if (s < ue_busy_until_) {
      drop(s);
      return;
    }
    ue_busy_until_ = s + 1;
    transmit(a, s, s + 2, s + 4, true);
  }

  // Reserved grant at slot g: PDCCH read in g, UE processing, PUSCH in g + 2,
  // eNB decoding. The PUSCH slot is held whether or not data is sent.
  void reserve_grants(bool burst_only) {
    for (long long g = 0; g < total_slots_; g += pg_slots_) {
      if (burst_only && g % period_slots_ >= burst_slots_) continue;
      out_.tx_slots.push_back(g + 2);
    }
  }

  void offer_grant(double a, long long window_end) {
    const long long s = slot_of(a, tti_);
    arrive(s);
    const long long g = round_up_to(s, pg_slots_);
    if (pending_ > 0 && g != pending_grant_) flush();
    if (g >= window_end) {
      drop(s);
      return;
    }
    pending_grant_ = g;
    pending_time_ = a;
    ++pending_;
  }

  void flush() {
    if (pending_ == 0) return;
    const long long s = slot_of(pending_time_, tti_);
    transmit(pending_time_, s, pending_grant_ + 2, pending_grant_ + 4, false);
    // Superseded packets were older and belong to the same or an earlier
    // slot; attribute them to the newest packet's period.
    if (auto* t = tally_for(s)) t->dropped += pending_ - 1;
    pending_ = 0;
  }

  const SimConfig& config_;
  double tti_;
  long long total_slots_;
  long long period_slots_;
  long long burst_slots_;
  long long pg_slots_;
  long long sr_slots_;

  long long ue_busy_until_ = 0;
  long long pending_grant_ = -1;
  double pending_time_ = 0.0;
  long long pending_ = 0;

  HapticOutcome out_;
};

}  // namespace

std::vector<std::string> SimConfig::violations() const {
  auto issues = radio.violations();
  for (auto& issue : haptic.violations()) issues.push_back(std::move(issue));
  for (auto& issue : leftover.violations()) issues.push_back(std::move(issue));
  if (!issues.empty()) return issues;

  if (horizon < 10.0 * haptic.t_p - kTimeEps) {
    issues.push_back(fmt::format("horizon ({} s) must be >= 10 * haptic.t_p ({} s)", horizon, 10.0 * haptic.t_p));
  }
  const auto on_lattice = [&](double t, const char* name) {
    if (slot_count(t, radio.tti) < 1) {
      issues.push_back(fmt::format("{} ({} s) is not a whole number of TTIs ({} s)", name, t, radio.tti));
    }
  };
  on_lattice(radio.t_sr, "radio.t_sr");
  on_lattice(radio.t_pg, "radio.t_pg");
  on_lattice(haptic.t_p, "haptic.t_p");
  on_lattice(haptic.t_b, "haptic.t_b");
  return issues;
}

void SimConfig::validate() const {
  if (auto issues = violations(); !issues.empty()) throw ConfigError(std::move(issues));
}

long long SimConfig::slots() const { return std::llround(horizon / radio.tti); }

double SimReport::haptic_delay_max() const {
  if (haptic_delays.empty()) return 0.0;
  return *std::max_element(haptic_delays.begin(), haptic_delays.end());
}

SimReport run(const SimConfig& config) {
  config.validate();
  const double horizon = static_cast<double>(config.slots()) * config.radio.tti;
  return run(config, leftover_arrivals(config.leftover, horizon, config.seed));
}

SimReport run(const SimConfig& config, const ArrivalTimeline& leftover) {
  config.validate();
  const double tti = config.radio.tti;
  const long long total_slots = config.slots();
  const double horizon = static_cast<double>(total_slots) * tti;
  const int m = m_blocks(config.radio);
  const double full_rate = config.radio.total_rate;
  const double reduced_rate = (config.radio.n_channels - m) * config.radio.channel_rate();

  SimReport report;
  report.seed = config.seed;
  report.slots_simulated = total_slots;

  auto haptic = HapticReplay(config).run();

  auto& tx = haptic.tx_slots;
  std::sort(tx.begin(), tx.end());
  const auto before = static_cast<long long>(tx.size());
  tx.erase(std::unique(tx.begin(), tx.end()), tx.end());
  report.occupancy_conflicts = before - static_cast<long long>(tx.size());
  tx.erase(std::lower_bound(tx.begin(), tx.end(), total_slots), tx.end());

  const long long period_slots = slot_count(config.haptic.t_p, tti);
  for (const long long s : tx) {
    const auto p = static_cast<std::size_t>(s / period_slots);
    if (p < haptic.tallies.size()) ++haptic.tallies[p].occupied_slots;
  }

  if (haptic.tallies.size() > 1) {
    report.periods.assign(haptic.tallies.begin() + 1, haptic.tallies.end());
  }
  long long arrivals = 0;
  long long dropped = 0;
  double remainder = 0.0;
  const double haptic_slot_bits = m * config.radio.channel_rate() * tti;
  for (const auto& t : report.periods) {
    arrivals += t.arrivals;
    dropped += t.dropped;
    remainder += full_rate * config.haptic.t_p - haptic_slot_bits * static_cast<double>(t.occupied_slots);
  }
  report.haptic_drop_rate = arrivals == 0 ? 0.0 : static_cast<double>(dropped) / static_cast<double>(arrivals);
  report.remainder_bits_per_period = report.periods.empty() ? 0.0 : remainder / report.periods.size();
  report.haptic_delays = std::move(haptic.delays);

  // Background FIFO, fluid within each slot.
  const Occupancy occupancy(std::move(tx), tti, full_rate, reduced_rate);
  const double warm_up = config.haptic.t_p;
  std::vector<double> completions;
  completions.reserve(leftover.size());
  std::size_t cursor = 0;
  double server_free = 0.0;
  for (const auto& a : leftover.arrivals) {
    const double start = std::max(a.time, server_free);
    const double done = occupancy.serve(start, a.size, cursor);
    completions.push_back(done);
    server_free = done;

    if (done <= horizon) {
      report.leftover_bits_served += a.size;
      if (a.time >= warm_up) {
        report.leftover_delays.push_back(done - a.time);
        report.leftover_waits.push_back(start - a.time);
      }
    } else {
      ++report.leftover_unfinished;
      if (start < horizon) report.leftover_bits_served += occupancy.capacity(start, horizon);
    }
  }
  report.leftover_capacity_bits = occupancy.capacity(0.0, horizon);

  // Queue growth check at horizon / 2 and horizon.
  const auto backlog_at = [&](double t) {
    long long arrived = 0;
    long long done = 0;
    for (std::size_t i = 0; i < leftover.size(); ++i) {
      if (leftover.arrivals[i].time <= t) {
        ++arrived;
        if (completions[i] <= t) ++done;
      }
    }
    return arrived - done;
  };
  const long long mid = backlog_at(0.5 * horizon);
  const long long end = backlog_at(horizon);
  if (end > 100 && 2 * end > 3 * mid) {
    throw InfeasibleError(fmt::format("{}: background queue grows without bound ({} packets at {} s, {} at {} s)",
                                      to_string(config.scheme), mid, 0.5 * horizon, end, horizon));
  }
  return report;
}

double empirical_quantile(std::span<const double> samples, double p) {
  if (samples.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
  if (!(p > 0 && p <= 1)) throw std::invalid_argument(fmt::format("empirical_quantile: p must be in (0, 1] (got {})", p));
  std::vector<double> sorted(samples.begin(), samples.end());
  const auto n = static_cast<long long>(sorted.size());
  const long long rank = std::clamp<long long>(stable_ceil(p * static_cast<double>(n)), 1, n);
  auto nth = sorted.begin() + (rank - 1);
  std::nth_element(sorted.begin(), nth, sorted.end());
  return *nth;
}

bool validate_against_walk(const SimConfig& config, std::ostream* log) {
  config.validate();
  const auto report = run(config, ArrivalTimeline{{}, config.horizon});
  const auto walk = drop_walk(config.scheme, config.radio, config.haptic, TimeBase::Slotted);

  bool ok = !report.periods.empty();
  for (std::size_t i = 0; i < report.periods.size(); ++i) {
    const auto& p = report.periods[i];
    if (p.arrivals == walk.arrivals && p.transmitted == walk.transmitted && p.dropped == walk.dropped) continue;
    ok = false;
    if (log != nullptr) {
      *log << fmt::format(
          "{} tti={} t_ib={}: period {} simulated arrivals/transmitted/dropped {}/{}/{} vs walk {}/{}/{}\n",
          to_string(config.scheme), config.radio.tti, config.haptic.t_ib, i + 1, p.arrivals, p.transmitted,
          p.dropped, walk.arrivals, walk.transmitted, walk.dropped);
    }
  }
  return ok;
}

nlohmann::json to_json(const SimReport& report) {
  nlohmann::json periods = nlohmann::json::array();
  for (const auto& p : report.periods) {
    periods.push_back({{"arrivals", p.arrivals},
                       {"transmitted", p.transmitted},
                       {"dropped", p.dropped},
                       {"occupied_slots", p.occupied_slots}});
  }
  return {
      {"seed", report.seed},
      {"slots_simulated", report.slots_simulated},
      {"haptic_drop_rate", report.haptic_drop_rate},
      {"haptic_delays", report.haptic_delays},
      {"periods", std::move(periods)},
      {"remainder_bits_per_period", report.remainder_bits_per_period},
      {"leftover_delays", report.leftover_delays},
      {"leftover_waits", report.leftover_waits},
      {"leftover_bits_served", report.leftover_bits_served},
      {"leftover_capacity_bits", report.leftover_capacity_bits},
      {"leftover_unfinished", report.leftover_unfinished},
      {"occupancy_conflicts", report.occupancy_conflicts},
  };
}

std::string sim_csv_header() {
  return "scheme,tti_s,t_ib_s,seed,haptic_drop_rate,haptic_delay_max_s,leftover_p99_s,remainder_bits";
}

std::string sim_csv_row(const SimConfig& config, const SimReport& report) {
  const std::string p99 =
      report.leftover_delays.empty() ? std::string{} : fmt::format("{:.9f}", empirical_quantile(report.leftover_delays, 0.99));
  return fmt::format("{},{:.9f},{:.9f},{},{:.9f},{:.9f},{},{:.3f}", to_string(config.scheme), config.radio.tti,
                     config.haptic.t_ib, config.seed, report.haptic_drop_rate, report.haptic_delay_max(), p99,
                     report.remainder_bits_per_period);
}

}  // namespace hapsched
