#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace hapsched {

// Periodic bursty haptic source. Each period of length t_p opens with a
// burst of length t_b in which packets arrive every t_ib; for the rest of
// the period packets arrive every t_nb.
struct HapticTrafficModel {
  double t_p = 1.0;
  double t_b = 0.2;
  double t_ib = 2e-3;
  double t_nb = 50e-3;
  // Append one extra burst at the end of analysis timelines.
  bool worst_case_excess_burst = true;

  // Offset within the period, in [0, t_p).
  double phase(double t) const;
  bool in_burst(double t) const;

  std::vector<std::string> violations() const;
  void validate() const;
};

enum class SizeDistribution { Deterministic, ExponentialMean };

// Compound Poisson background flow: Poisson(lambda_rate) packet instants,
// packet size sigma bits (or exponential with mean sigma).
struct LeftoverTrafficModel {
  double lambda_rate = 4.0;
  double sigma = 12000.0;
  SizeDistribution size_distribution = SizeDistribution::Deterministic;

  double mean_rate() const { return lambda_rate * sigma; }

  std::vector<std::string> violations() const;
  void validate() const;
};

struct Arrival {
  double time = 0.0;
  double size = 0.0;

  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct ArrivalTimeline {
  std::vector<Arrival> arrivals;
  double horizon = 0.0;

  std::size_t size() const { return arrivals.size(); }
  bool empty() const { return arrivals.empty(); }
};

// Per-period packet counts of the haptic model over a window of `duration`.
struct PeriodCounters {
  long long n_p = 0;   // whole periods in the window
  long long r_b = 0;   // packets per burst
  long long r_nb = 0;  // packets per non-burst segment
  long long r_p = 0;   // packets per period
};

PeriodCounters counters(const HapticTrafficModel& model, double duration);

// Deterministic haptic arrivals on [0, horizon). Every burst carries exactly
// r_b packets and every non-burst segment r_nb, so a burst never ends with a
// packet closer than t_ib to the following segment. Sizes are one unit.
ArrivalTimeline haptic_arrivals(const HapticTrafficModel& model, double horizon);

// Seeded Poisson arrivals on [0, horizon). Identical inputs give identical
// timelines.
ArrivalTimeline leftover_arrivals(const LeftoverTrafficModel& model, double horizon,
                                  std::uint64_t seed);

// `arrival_time_s,size_bits` with 9-decimal fixed-point times.
void write_timeline_csv(std::ostream& out, const ArrivalTimeline& timeline);
ArrivalTimeline read_timeline_csv(std::istream& in, double horizon);

}  // namespace hapsched
