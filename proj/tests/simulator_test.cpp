#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hapsched/sched_analysis.hpp"
#include "hapsched/simulator.hpp"

namespace hapsched {
namespace {

SimConfig config(Scheme scheme, double tti, double t_ib, double horizon = 20.0) {
  SimConfig c;
  c.radio = RadioConfig::with_tti(tti);
  c.haptic.t_ib = t_ib;
  c.scheme = scheme;
  c.horizon = horizon;
  return c;
}

ArrivalTimeline empty(const SimConfig& c) { return {{}, c.horizon}; }

TEST(Simulator, NoBackgroundRemainderMatchesAnalysis) {
  for (const auto s : kAllSchemes) {
    const auto c = config(s, 0.5e-3, 2e-3);
    const auto r = run(c, empty(c));
    EXPECT_TRUE(r.leftover_delays.empty());
    const double m = m_blocks(c.radio);
    const double slot_bits = m * c.radio.channel_rate() * c.radio.tti;
    ASSERT_FALSE(r.periods.empty());
    for (const auto& p : r.periods) {
      EXPECT_NEAR(r.remainder_bits_per_period, 1e6 - slot_bits * static_cast<double>(p.occupied_slots), slot_bits);
    }
    EXPECT_NEAR(r.remainder_bits_per_period, remainder_of_service(s, c.radio, c.haptic), slot_bits) << to_string(s);
  }
}

TEST(Simulator, FaNeverDropsOnTableGrid) {
  for (int i = 0; i <= 40; i += 4) {
    const auto c = config(Scheme::FastUplink, 0.5e-3, 1e-3 + i * 0.05e-3);
    EXPECT_EQ(run(c, empty(c)).haptic_drop_rate, 0.0) << c.haptic.t_ib;
  }
}

TEST(Simulator, DsAtTwoMsHasNoDropsAndBoundedDelay) {
  const auto c = config(Scheme::DynamicScheduling, 0.5e-3, 2e-3, 100.0);
  const auto r = run(c);
  EXPECT_EQ(r.haptic_drop_rate, 0.0);
  EXPECT_LE(r.haptic_delay_max(), 7 * c.radio.tti + 1e-12);
}

TEST(Simulator, SpsDelayWithinGrantPeriodPlusFourTtis) {
  const auto c = config(Scheme::SemiPersistent, 0.5e-3, 2e-3);
  EXPECT_LE(run(c).haptic_delay_max(), 14 * c.radio.tti + 1e-12);
}

TEST(Simulator, NoOccupancyConflicts) {
  for (const auto s : kAllSchemes) EXPECT_EQ(run(config(s, 0.25e-3, 1.3e-3)).occupancy_conflicts, 0);
}

TEST(Simulator, WorkConservingUnderBacklog) {
  const auto c = config(Scheme::SemiPersistent, 0.5e-3, 2e-3);
  ArrivalTimeline big{{{0.0, 1e12}}, c.horizon};
  const auto r = run(c, big);
  EXPECT_NEAR(r.leftover_bits_served, r.leftover_capacity_bits, 1e-6 * r.leftover_capacity_bits);
  EXPECT_EQ(r.leftover_unfinished, 1);
}

TEST(Simulator, SinglePacketOnIdleChannelTakesItsTransmissionTime) {
  const auto c = config(Scheme::FastUplink, 0.5e-3, 2e-3);
  // Starts at 0.5 s, deep inside the non-burst part of the first period.
  ArrivalTimeline one{{{1.5 + 1e-3, 12000.0}}, c.horizon};
  const auto r = run(c, one);
  ASSERT_EQ(r.leftover_delays.size(), 1U);
  EXPECT_GE(r.leftover_delays[0], 12000.0 / 1e6 - 1e-12);
  EXPECT_LE(r.leftover_delays[0], 12000.0 / (1e6 * 0.8) + 1e-12);
}

TEST(Simulator, DeterministicForSeed) {
  const auto c = config(Scheme::SoftResourceReservation, 0.5e-3, 2e-3);
  EXPECT_EQ(to_json(run(c)).dump(), to_json(run(c)).dump());
}

TEST(Simulator, RejectsOffLatticePeriods) {
  auto c = config(Scheme::SemiPersistent, 0.5e-3, 2e-3);
  c.radio.t_pg = 5.25e-3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(validate_against_walk(c), ConfigError);
}

TEST(Simulator, RejectsShortHorizon) {
  auto c = config(Scheme::SemiPersistent, 0.5e-3, 2e-3, 5.0);
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Simulator, OverloadIsReportedAsInfeasible) {
  auto c = config(Scheme::SemiPersistent, 0.5e-3, 2e-3, 30.0);
  c.leftover.lambda_rate = 200.0;
  EXPECT_THROW(run(c), InfeasibleError);
}

TEST(ValidateAgainstWalk, TableGrid) {
  for (const auto s : {Scheme::DynamicScheduling, Scheme::FastUplink, Scheme::SemiPersistent}) {
    for (const double tti : {0.25e-3, 0.5e-3}) {
      std::ostringstream log;
      EXPECT_TRUE(validate_against_walk(config(s, tti, 2e-3), &log)) << log.str();
    }
  }
}

TEST(Quantile, NearestRank) {
  const std::vector<double> v{4, 1, 3, 2};
  EXPECT_EQ(empirical_quantile(v, 0.5), 2.0);
  EXPECT_EQ(empirical_quantile(std::vector<double>{5}, 0.01), 5.0);
  EXPECT_EQ(empirical_quantile(std::vector<double>{5}, 1.0), 5.0);
}

TEST(Quantile, UniformSamples) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(100000);
  for (auto& x : v) x = u(rng);
  EXPECT_NEAR(empirical_quantile(v, 0.99), 0.99, 0.01);
}

TEST(Quantile, RejectsBadInput) {
  EXPECT_THROW(empirical_quantile(std::vector<double>{}, 0.5), std::invalid_argument);
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 0.0), std::invalid_argument);
  EXPECT_THROW(empirical_quantile(std::vector<double>{1.0}, 1.5), std::invalid_argument);
}

TEST(SimCsv, HeaderIsStable) {
  EXPECT_EQ(sim_csv_header(), "scheme,tti_s,t_ib_s,seed,haptic_drop_rate,haptic_delay_max_s,leftover_p99_s,remainder_bits");
}

}  // namespace
}  // namespace hapsched
