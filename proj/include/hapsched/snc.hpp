#pragma once

#include <functional>
#include <string>

#include "hapsched/radio_model.hpp"
#include "hapsched/traffic.hpp"

namespace hapsched {

// Effective-bandwidth arrival curve of a compound Poisson source with fixed
// packet size: alpha(t) = lambda (e^{theta sigma} - 1) / theta * t, bounded
// by f(x) = e^{-theta x}.
struct ArrivalCurve {
  double theta = 0.0;
  double lambda_rate = 0.0;
  double sigma = 0.0;

  ArrivalCurve() = default;
  ArrivalCurve(double theta, const LeftoverTrafficModel& model);
  ArrivalCurve(double theta, double lambda_rate, double sigma);

  double rate() const;
  double operator()(double t) const { return rate() * t; }
  double bound(double x) const;
};

// Service left to background traffic after the haptic flow takes its RBs.
//
// beta(u) = ((N - m) C / N) u + (m C / N) (u - n_p(u) R TTI - R_x TTI - 2 TTI)
//
// with n_p(u) = floor(u / t_p), R the RB-groups the scheme consumes per
// period and R_x the excess-burst term. No positive-part clamp: beta(0) < 0
// and the curve drops by (m C / N) R TTI at every multiple of t_p.
class ServiceCurve {
 public:
  ServiceCurve(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic);

  double operator()(double u) const;

  Scheme scheme() const { return scheme_; }
  const RadioConfig& radio() const { return radio_; }
  const HapticTrafficModel& haptic() const { return haptic_; }
  int m() const { return m_; }

  long long per_period() const { return per_period_; }
  long long excess() const { return excess_; }

  // Haptic rate on the m shared channels.
  double haptic_channel_rate() const { return m_ * radio_.channel_rate(); }
  // -beta(0).
  double offset() const;
  // Drop at each period boundary.
  double jump() const;
  // Slope over whole periods. May be <= 0 for a saturating haptic load;
  // long_run_rate() rejects that case.
  double asymptotic_slope() const;

 private:
  Scheme scheme_;
  RadioConfig radio_;
  HapticTrafficModel haptic_;
  int m_ = 0;
  long long per_period_ = 0;
  long long excess_ = 0;
};

double beta_lo(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic, double u);

// lim beta(u) / u. Throws InfeasibleError when the haptic flow leaves nothing.
double long_run_rate(const ServiceCurve& curve);

// Back-off applied to the root so the stability inequality stays strict.
inline constexpr double kThetaBackoff = 1e-9;
// Relative bracket width at which bisection stops.
inline constexpr double kThetaTolerance = 1e-12;

// Largest theta with lambda (e^{theta sigma} - 1) / theta < service_rate.
double max_theta(const LeftoverTrafficModel& arrival, double service_rate);

// Conservative inverse: inf{ s >= 0 : beta(u) >= x for all u >= s }.
double invert_beta(const ServiceCurve& curve, double x);

enum class OutageConvention {
  // e^{-theta beta(d0)} = epsilon, i.e. P{d > d0} <= epsilon.
  Violation,
  // e^{-theta beta(d0)} = 1 - epsilon.
  OneMinusEpsilon,
};

std::string_view to_string(OutageConvention convention);
OutageConvention parse_outage_convention(std::string_view name);

struct BoundResult {
  Scheme scheme = Scheme::DynamicScheduling;
  double epsilon = 0.0;
  double theta = 0.0;
  double x_bits = 0.0;
  double d0 = 0.0;
  double long_run_rate = 0.0;
};

BoundResult delay_bound(Scheme scheme, const RadioConfig& radio, const HapticTrafficModel& haptic,
                        const LeftoverTrafficModel& leftover, double epsilon,
                        OutageConvention convention = OutageConvention::Violation);

// sup over tau in [0, horizon] of the conservative shift s with
// alpha(tau) + x <= beta(tau + s), evaluated on a TTI/4 grid plus every
// breakpoint of the composed function. Always >= invert_beta(curve, x).
double horizontal_distance(const ArrivalCurve& arrival, double x, const ServiceCurve& curve, double horizon);

// Violation bound of a delay built from an arrival bound f and a service
// bound g: (f (x) g)(x) = inf_{0<=y<=x} f(y) + g(x - y), on `steps` points.
using BoundingFunction = std::function<double(double)>;
double convolve_bounds(const BoundingFunction& f, const BoundingFunction& g, double x, int steps = 1000);

// With an error-free channel the service bound vanishes and the delay bound
// is the arrival bound alone.
inline BoundingFunction error_free_service_bound() {
  return [](double) { return 0.0; };
}

std::string bound_csv_header();
std::string bound_csv_row(const RadioConfig& radio, const HapticTrafficModel& haptic, const BoundResult& result);

}  // namespace hapsched
