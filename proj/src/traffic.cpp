#include "hapsched/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "hapsched/radio_model.hpp"

namespace hapsched {

double HapticTrafficModel::phase(double t) const {
  const double k = std::floor(t / t_p + 1e-12);
  return std::max(0.0, t - k * t_p);
}

bool HapticTrafficModel::in_burst(double t) const {
  return phase(t) < t_b - kTimeEps;
}

std::vector<std::string> HapticTrafficModel::violations() const {
  std::vector<std::string> issues;
  if (!(t_p > 0)) issues.push_back(fmt::format("haptic.t_p must be > 0 (got {})", t_p));
  if (!(t_b > 0)) issues.push_back(fmt::format("haptic.t_b must be > 0 (got {})", t_b));
  if (t_p > 0 && t_b >= t_p) {
    issues.push_back(fmt::format("haptic.t_b ({} s) must be < haptic.t_p ({} s)", t_b, t_p));
  }
  if (!(t_ib > 0)) {
    issues.push_back(fmt::format("haptic.t_ib must be > 0 (got {})", t_ib));
  } else if (t_ib > t_b + kTimeEps) {
    issues.push_back(fmt::format("haptic.t_ib ({} s) must be <= haptic.t_b ({} s)", t_ib, t_b));
  }
  if (!(t_nb > 0)) {
    issues.push_back(fmt::format("haptic.t_nb must be > 0 (got {})", t_nb));
  } else if (t_b < t_p && t_nb > t_p - t_b + kTimeEps) {
    issues.push_back(fmt::format("haptic.t_nb ({} s) must be <= haptic.t_p - haptic.t_b ({} s)", t_nb,
                                 t_p - t_b));
  }
  return issues;
}

void HapticTrafficModel::validate() const {
  if (auto issues = violations(); !issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<std::string> LeftoverTrafficModel::violations() const {
  std::vector<std::string> issues;
  if (!(lambda_rate > 0)) issues.push_back(fmt::format("leftover.lambda_rate must be > 0 (got {})", lambda_rate));
  if (!(sigma > 0)) issues.push_back(fmt::format("leftover.sigma must be > 0 (got {})", sigma));
  return issues;
}

void LeftoverTrafficModel::validate() const {
  if (auto issues = violations(); !issues.empty()) throw ConfigError(std::move(issues));
}

PeriodCounters counters(const HapticTrafficModel& model, double duration) {
  model.validate();
  if (duration < 0) throw ConfigError(fmt::format("duration must be >= 0 (got {})", duration));
  PeriodCounters c;
  c.n_p = stable_floor(duration / model.t_p);
  c.r_b = stable_floor(model.t_b / model.t_ib);
  c.r_nb = stable_floor((model.t_p - model.t_b) / model.t_nb);
  c.r_p = c.r_b + c.r_nb;
  return c;
}

ArrivalTimeline haptic_arrivals(const HapticTrafficModel& model, double horizon) {
  model.validate();
  ArrivalTimeline out;
  out.horizon = horizon;
  if (!(horizon > 0)) return out;

  const auto c = counters(model, 0.0);
  const auto before_horizon = [&](double t) { return t < horizon - kTimeEps; };

  for (long long k = 0;; ++k) {
    const double start = static_cast<double>(k) * model.t_p;
    if (!before_horizon(start)) break;
    for (long long j = 0; j < c.r_b; ++j) {
      const double t = start + static_cast<double>(j) * model.t_ib;
      if (!before_horizon(t)) break;
      out.arrivals.push_back({t, 1.0});
    }
    for (long long j = 0; j < c.r_nb; ++j) {
      const double t = start + model.t_b + static_cast<double>(j) * model.t_nb;
      if (!before_horizon(t)) break;
      out.arrivals.push_back({t, 1.0});
    }
  }

  if (model.worst_case_excess_burst) {
    // One burst's worth of packets starting t_b before the horizon.
    const double start = std::max(0.0, horizon - model.t_b);
    std::vector<Arrival> extra;
    for (long long j = 0; j < c.r_b; ++j) {
      const double t = start + static_cast<double>(j) * model.t_ib;
      if (!before_horizon(t)) break;
      extra.push_back({t, 1.0});
    }
    std::vector<Arrival> merged;
    merged.reserve(out.arrivals.size() + extra.size());
    std::merge(out.arrivals.begin(), out.arrivals.end(), extra.begin(), extra.end(),
               std::back_inserter(merged),
               [](const Arrival& a, const Arrival& b) { return a.time < b.time; });
    auto last = std::unique(merged.begin(), merged.end(), [](const Arrival& a, const Arrival& b) {
      return std::abs(a.time - b.time) <= kTimeEps;
    });
    merged.erase(last, merged.end());
    out.arrivals = std::move(merged);
  }
  return out;
}

ArrivalTimeline leftover_arrivals(const LeftoverTrafficModel& model, double horizon,
                                  std::uint64_t seed) {
  model.validate();
  ArrivalTimeline out;
  out.horizon = horizon;
  if (!(horizon > 0)) return out;

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> gap(model.lambda_rate);
  std::exponential_distribution<double> size(1.0 / model.sigma);
  out.arrivals.reserve(static_cast<std::size_t>(model.lambda_rate * horizon * 1.1) + 16);

  double t = gap(rng);
  while (t < horizon) {
    double bits = model.sigma;
    if (model.size_distribution == SizeDistribution::ExponentialMean) {
      do {
        bits = size(rng);
      } while (!(bits > 0));
    }
    if (out.arrivals.empty() || t > out.arrivals.back().time) out.arrivals.push_back({t, bits});
    t += gap(rng);
  }
  return out;
}

void write_timeline_csv(std::ostream& out, const ArrivalTimeline& timeline) {
  out << "arrival_time_s,size_bits\n";
  for (const auto& a : timeline.arrivals) out << fmt::format("{:.9f},{}\n", a.time, a.size);
}

ArrivalTimeline read_timeline_csv(std::istream& in, double horizon) {
  ArrivalTimeline out;
  out.horizon = horizon;
  std::string line;
  if (!std::getline(in, line) || line != "arrival_time_s,size_bits") {
    throw ConfigError("timeline csv: expected header 'arrival_time_s,size_bits'");
  }
  std::vector<std::string> issues;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    Arrival a;
    char comma = 0;
    if (!(row >> a.time >> comma >> a.size) || comma != ',') {
      issues.push_back(fmt::format("timeline csv line {}: cannot parse '{}'", line_no, line));
      continue;
    }
    if (!(a.size > 0)) issues.push_back(fmt::format("timeline csv line {}: size must be > 0", line_no));
    if (a.time < 0 || a.time > horizon) {
      issues.push_back(fmt::format("timeline csv line {}: time {} outside [0, {}]", line_no, a.time, horizon));
    }
    if (!out.arrivals.empty() && a.time <= out.arrivals.back().time) {
      issues.push_back(fmt::format("timeline csv line {}: times must be strictly increasing", line_no));
    }
    out.arrivals.push_back(a);
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return out;
}

}  // namespace hapsched
