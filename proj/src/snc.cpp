#include "hapsched/snc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "hapsched/sched_analysis.hpp"

namespace hapsched {

ArrivalCurve::ArrivalCurve(double theta, const LeftoverTrafficModel& model)
    : ArrivalCurve(theta, model.lambda_rate, model.sigma) {}

ArrivalCurve::ArrivalCurve(double theta_, double lambda_rate_, double sigma_)
    : theta(theta_), lambda_rate(lambda_rate_), sigma(sigma_) {
  if (!(theta > 0)) throw ConfigError(fmt::format("arrival curve: theta must be > 0 (got {})", theta));
}

double ArrivalCurve::rate() const {
  return lambda_rate * std::expm1(theta * sigma) / theta;
}

double ArrivalCurve::bound(double x) const { return std::exp(-theta * x); }

ServiceCurve::ServiceCurve(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic)
    : scheme_(scheme), radio_(radio), haptic_(haptic) {
  radio_.validate();
  haptic_.validate();
  m_ = m_blocks(radio_);
  const auto c = counters(haptic_, haptic_.t_p);
  const long long grants_per_period = stable_floor(haptic_.t_p / radio_.t_pg);
  const long long burst_grants = stable_floor(haptic_.t_b / radio_.t_pg);
  switch (scheme_) {
    case Scheme::DynamicScheduling:
      excess_ = ds_effective_burst_count(radio_, haptic_);
      per_period_ = excess_ + c.r_nb;
      break;
    case Scheme::FastUplink:
      excess_ = fa_effective_burst_count(radio_, haptic_);
      per_period_ = excess_ + c.r_nb;
      break;
    case Scheme::SemiPersistent:
      excess_ = burst_grants;
      per_period_ = grants_per_period;
      break;
    case Scheme::SoftResourceReservation:
      excess_ = burst_grants;
      per_period_ = burst_grants + c.r_nb;
      break;
  }
}

double ServiceCurve::operator()(double u) const {
  const double n = static_cast<double>(radio_.n_channels);
  const double c = radio_.total_rate;
  const double tti = radio_.tti;
  const double n_p = static_cast<double>(stable_floor(u / haptic_.t_p));
  const double free_part = (n - m_) * c / n * u;
  const double shared_part =
      m_ * c / n * (u - n_p * per_period_ * tti - static_cast<double>(excess_) * tti - 2.0 * tti);
  return free_part + shared_part;
}

double ServiceCurve::offset() const {
  return haptic_channel_rate() * (static_cast<double>(excess_) + 2.0) * radio_.tti;
}

double ServiceCurve::jump() const {
  return haptic_channel_rate() * static_cast<double>(per_period_) * radio_.tti;
}

double ServiceCurve::asymptotic_slope() const {
  return radio_.total_rate - jump() / haptic_.t_p;
}

double beta_lo(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic, double u) {
  if (u < 0) throw ConfigError(fmt::format("beta_lo: u must be >= 0 (got {})", u));
  return ServiceCurve(scheme, radio, haptic)(u);
}

double long_run_rate(const ServiceCurve& curve) {
  const double rate = curve.asymptotic_slope();
  if (!(rate > 0)) {
    throw InfeasibleError(fmt::format("{}: haptic load saturates capacity (long-run leftover rate {} b/s)",
                                      to_string(curve.scheme()), rate));
  }
  return rate;
}

double max_theta(const LeftoverTrafficModel& arrival, double service_rate) {
  arrival.validate();
  const double floor_rate = arrival.mean_rate();
  if (!(service_rate > floor_rate)) {
    throw InfeasibleError(fmt::format(
        "no stable theta: service rate {} b/s does not exceed the mean arrival rate {} b/s", service_rate,
        floor_rate));
  }
  // Solve in y = theta * sigma: expm1(y) / y = service_rate / (lambda sigma).
  const double target = service_rate / floor_rate;
  const auto excess = [target](double y) { return (y == 0.0 ? 1.0 : std::expm1(y) / y) - target; };

  double hi = 1.0;
  while (excess(hi) <= 0.0) hi *= 2.0;
  const auto close_enough = [](double a, double b) { return std::abs(b - a) <= kThetaTolerance * std::abs(b); };
  const auto [lo_y, hi_y] = boost::math::tools::bisect(excess, 0.0, hi, close_enough);
  const double y = 0.5 * (lo_y + hi_y);
  return y / arrival.sigma * (1.0 - kThetaBackoff);
}

double invert_beta(const ServiceCurve& curve, double x) {
  if (x < 0) throw ConfigError(fmt::format("invert_beta: x must be >= 0 (got {})", x));
  const double rate = long_run_rate(curve);
  const double t_p = curve.haptic().t_p;
  const double c = curve.radio().total_rate;

  // beta restricted to [k t_p, inf) is smallest at k t_p and those minima
  // grow by rate * t_p per period, so find the first period start that is
  // already >= x and solve on the rising segment just before it.
  const auto start_value = [&](long long k) { return curve(static_cast<double>(k) * t_p); };
  long long k = std::max<long long>(0, static_cast<long long>(std::ceil((x + curve.offset()) / (rate * t_p))));
  while (k > 0 && start_value(k - 1) >= x) --k;
  while (start_value(k) < x) ++k;
  if (k == 0) return 0.0;

  const double seg_start = static_cast<double>(k - 1) * t_p;
  const double seg_base = start_value(k - 1);
  const double u = seg_start + (x - seg_base) / c;
  return std::clamp(u, seg_start, static_cast<double>(k) * t_p);
}

std::string_view to_string(OutageConvention convention) {
  return convention == OutageConvention::Violation ? "violation" : "paper_literal";
}

OutageConvention parse_outage_convention(std::string_view name) {
  if (name == "violation") return OutageConvention::Violation;
  if (name == "paper_literal") return OutageConvention::OneMinusEpsilon;
  throw ConfigError(fmt::format("unknown outage convention '{}' (violation | paper_literal)", name));
}

BoundResult delay_bound(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                        const LeftoverTrafficModel& leftover, double epsilon, OutageConvention convention) {
  if (!(epsilon > 0 && epsilon < 1)) {
    throw ConfigError(fmt::format("snc.epsilon must be in (0, 1) (got {})", epsilon));
  }
  const ServiceCurve curve(scheme, radio, haptic);
  BoundResult result;
  result.scheme = scheme;
  result.epsilon = epsilon;
  result.long_run_rate = long_run_rate(curve);
  result.theta = max_theta(leftover, result.long_run_rate);
  const double log_inverse =
      convention == OutageConvention::Violation ? -std::log(epsilon) : -std::log1p(-epsilon);
  result.x_bits = log_inverse / result.theta;
  result.d0 = invert_beta(curve, result.x_bits);
  return result;
}

double horizontal_distance(const ArrivalCurve& arrival, double x, const ServiceCurve& curve, double horizon) {
  if (x < 0) throw ConfigError(fmt::format("horizontal_distance: x must be >= 0 (got {})", x));
  const double t_p = curve.haptic().t_p;
  if (horizon < t_p) {
    throw ConfigError(fmt::format("horizontal_distance: horizon {} s shorter than one period {} s", horizon, t_p));
  }
  const double service_rate = long_run_rate(curve);
  const double r = arrival.rate();
  if (!(r < service_rate)) {
    throw InfeasibleError(fmt::format("horizontal distance unbounded: arrival rate {} b/s >= service rate {} b/s",
                                      r, service_rate));
  }

  const auto shift = [&](double tau, double level) {
    return std::max(0.0, invert_beta(curve, level) - tau);
  };

  struct Sample {
    double tau;
    double value;
  };
  std::vector<Sample> samples;

  const double step = curve.radio().tti / 4.0;
  const auto grid_points = static_cast<long long>(std::floor(horizon / step));
  samples.reserve(static_cast<std::size_t>(grid_points) + 64);
  for (long long i = 0; i <= grid_points; ++i) {
    const double tau = static_cast<double>(i) * step;
    samples.push_back({tau, shift(tau, arrival(tau) + x)});
  }
  for (double tau = t_p; tau <= horizon; tau += t_p) samples.push_back({tau, shift(tau, arrival(tau) + x)});

  // The inverse jumps up when alpha(tau) + x reaches a period-start value
  // of beta. Take the right limit there.
  if (r > 0) {
    for (long long k = 0;; ++k) {
      const double level = curve(static_cast<double>(k) * t_p);
      if (level <= x) continue;
      const double tau = (level - x) / r;
      if (tau > horizon) break;
      const double just_above = level + 1e-9 * std::max(1.0, level);
      samples.push_back({tau, shift(tau, just_above)});
    }
  }

  double head = 0.0;
  double tail = 0.0;
  const double tail_start = 0.8 * horizon;
  for (const auto& s : samples) {
    if (s.tau < tail_start) {
      head = std::max(head, s.value);
    } else {
      tail = std::max(tail, s.value);
    }
  }
  if (tail > head * (1.0 + 1e-12) + 1e-15) {
    throw InfeasibleError(fmt::format("horizontal distance did not stabilize within horizon {} s", horizon));
  }
  return std::max(head, tail);
}

double convolve_bounds(const BoundingFunction& f, const BoundingFunction& g, double x, int steps) {
  if (steps < 1) steps = 1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double y = x * static_cast<double>(i) / steps;
    best = std::min(best, f(y) + g(x - y));
  }
  return best;
}

std::string bound_csv_header() {
  return "scheme,tti_s,t_ib_s,epsilon,theta,x_bits,d0_s,long_run_rate_bps";
}

std::string bound_csv_row(const RadioConfig& radio, const HapticTrafficModel& haptic, const BoundResult& result) {
  return fmt::format("{},{:.9f},{:.9f},{:.6g},{:.9e},{:.6f},{:.9f},{:.6f}", to_string(result.scheme), radio.tti,
                     haptic.t_ib, result.epsilon, result.theta, result.x_bits, result.d0, result.long_run_rate);
}

}  // namespace hapsched
