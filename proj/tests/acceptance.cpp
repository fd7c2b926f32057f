// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hapsched/experiment.hpp"
#include "hapsched/sched_analysis.hpp"
#include "hapsched/simulator.hpp"
#include "hapsched/snc.hpp"

namespace {

using namespace hapsched;

constexpr double kTableTtis[] = {0.125e-3, 0.25e-3, 0.5e-3, 1e-3};

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> notes;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      pass = false;
      if (notes.size() < 12) notes.push_back(what);
    }
  }
};

// 1 ms .. 3 ms in 0.05 ms steps.
std::vector<double> inter_arrival_grid() {
  std::vector<double> out;
  for (int i = 0; i <= 40; ++i) out.push_back(1e-3 + i * 0.05e-3);
  return out;
}

HapticTrafficModel haptic(double t_ib) {
  HapticTrafficModel m;
  m.t_ib = t_ib;
  return m;
}

Outcome access_delay_constants() {
  Outcome o;
  for (const double tti : kTableTtis) {
    const auto r = RadioConfig::with_tti(tti);
    const auto in_ttis = [&](Scheme s, bool burst) { return haptic_access_delay(s, r, burst) / tti; };
    o.require(in_ttis(Scheme::DynamicScheduling, true) == 7.0, fmt::format("DS at tti={}", tti));
    o.require(in_ttis(Scheme::FastUplink, true) == 4.0, fmt::format("FA at tti={}", tti));
    o.require(in_ttis(Scheme::SemiPersistent, true) == 14.0, fmt::format("SPS at tti={}", tti));
    o.require(in_ttis(Scheme::SoftResourceReservation, true) == 14.0, fmt::format("SRR at tti={}", tti));
  }
  o.detail = "DS 7, FA 4, SPS 14, SRR 14 TTIs at every table TTI";
  return o;
}

Outcome ds_drop_threshold() {
  Outcome o;
  const auto radio = RadioConfig::with_tti(0.5e-3);
  int zero = 0;
  int lossy = 0;
  for (const double t_ib : inter_arrival_grid()) {
    const auto r = drop_walk(Scheme::DynamicScheduling, radio, haptic(t_ib));
    if (t_ib >= 2e-3 - kTimeEps) {
      o.require(r.dropped == 0, fmt::format("drops at t_ib={:.2f} ms", t_ib * 1e3));
      zero += r.dropped == 0 ? 1 : 0;
    } else {
      o.require(r.dropped > 0, fmt::format("no drops at t_ib={:.2f} ms", t_ib * 1e3));
      lossy += r.dropped > 0 ? 1 : 0;
    }
  }
  o.detail = fmt::format("{}/21 zero-drop points in [2,3] ms, {}/20 lossy points in [1,2) ms", zero, lossy);
  return o;
}

Outcome fa_zero_drop() {
  Outcome o;
  int points = 0;
  for (const double tti : kTableTtis) {
    for (const double t_ib : inter_arrival_grid()) {
      SimConfig c;
      c.radio = RadioConfig::with_tti(tti);
      c.haptic = haptic(t_ib);
      c.scheme = Scheme::FastUplink;
      c.horizon = 20.0;
      const auto walk = drop_walk(Scheme::FastUplink, c.radio, c.haptic);
      const auto sim = run(c);
      o.require(walk.dropped == 0, fmt::format("walk drops at tti={} t_ib={}", tti, t_ib));
      o.require(sim.haptic_drop_rate == 0.0, fmt::format("simulated drops at tti={} t_ib={}", tti, t_ib));
      ++points;
    }
  }
  o.detail = fmt::format("{} points, walk and 20 s simulation", points);
  return o;
}

// Smallest grid t_ib from which every larger grid point has zero drops.
double zero_drop_threshold(Scheme s, double tti) {
  const auto grid = inter_arrival_grid();
  const auto radio = RadioConfig::with_tti(tti);
  double threshold = NAN;
  for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
    if (drop_walk(s, radio, haptic(*it)).dropped != 0) break;
    threshold = *it;
  }
  return threshold;
}

Outcome reserved_usable_regions() {
  Outcome o;
  constexpr double step = 0.05e-3;
  std::vector<std::string> found;
  for (const auto s : {Scheme::SemiPersistent, Scheme::SoftResourceReservation}) {
    const double t125 = zero_drop_threshold(s, 0.125e-3);
    const double t250 = zero_drop_threshold(s, 0.25e-3);
    o.require(!std::isnan(t125) && std::abs(t125 - 1.3e-3) <= step + kTimeEps,
              fmt::format("{} threshold at 0.125 ms: {} ms", to_string(s), t125 * 1e3));
    o.require(!std::isnan(t250) && std::abs(t250 - 2.5e-3) <= step + kTimeEps,
              fmt::format("{} threshold at 0.25 ms: {} ms", to_string(s), t250 * 1e3));
    for (const double t_ib : inter_arrival_grid()) {
      o.require(drop_walk(s, RadioConfig::with_tti(0.5e-3), haptic(t_ib)).dropped > 0,
                fmt::format("{} zero drops at tti=0.5 ms t_ib={} ms", to_string(s), t_ib * 1e3));
    }
    found.push_back(fmt::format("{} {:.2f}/{:.2f} ms", to_string(s), t125 * 1e3, t250 * 1e3));
  }
  o.detail = fmt::format("zero-drop from t_ib: {} (tti 0.125/0.25 ms); lossy over [1,3] ms at 0.5 ms",
                         fmt::join(found, ", "));
  return o;
}

Outcome remainder_orderings() {
  Outcome o;
  const auto radio = RadioConfig::with_tti(0.5e-3);
  const auto rem = [&](Scheme s, double t_ib) { return remainder_of_service(s, radio, haptic(t_ib)); };
  o.require(rem(Scheme::SoftResourceReservation, 2e-3) > rem(Scheme::SemiPersistent, 2e-3), "SRR <= SPS");
  for (const auto s : {Scheme::SemiPersistent, Scheme::SoftResourceReservation}) {
    o.require(rem(s, 1e-3) == rem(s, 2e-3) && rem(s, 2e-3) == rem(s, 3e-3),
              fmt::format("{} varies with t_ib", to_string(s)));
  }
  for (const auto s : {Scheme::DynamicScheduling, Scheme::FastUplink}) {
    o.require(rem(s, 1e-3) <= rem(s, 2e-3) && rem(s, 2e-3) <= rem(s, 3e-3),
              fmt::format("{} decreasing over t_ib in {{1,2,3}} ms", to_string(s)));
  }
  int both_zero = 0;
  double previous_ds = -1.0;
  double previous_fa = -1.0;
  for (const double t_ib : inter_arrival_grid()) {
    const bool ds_clean = drop_walk(Scheme::DynamicScheduling, radio, haptic(t_ib)).dropped == 0;
    const bool fa_clean = drop_walk(Scheme::FastUplink, radio, haptic(t_ib)).dropped == 0;
    if (ds_clean) {
      o.require(rem(Scheme::DynamicScheduling, t_ib) >= previous_ds, fmt::format("DS decreasing at {}", t_ib));
      previous_ds = rem(Scheme::DynamicScheduling, t_ib);
    }
    if (fa_clean) {
      o.require(rem(Scheme::FastUplink, t_ib) >= previous_fa, fmt::format("FA decreasing at {}", t_ib));
      previous_fa = rem(Scheme::FastUplink, t_ib);
    }
    if (ds_clean && fa_clean) {
      ++both_zero;
      o.require(rem(Scheme::DynamicScheduling, t_ib) == rem(Scheme::FastUplink, t_ib),
                fmt::format("DS != FA at t_ib={} ms", t_ib * 1e3));
    }
  }
  o.detail = fmt::format("SRR {:.0f} > SPS {:.0f} bits; DS/FA equal at {} zero-drop points", 
                         rem(Scheme::SoftResourceReservation, 2e-3), rem(Scheme::SemiPersistent, 2e-3), both_zero);
  return o;
}

Outcome ds_fa_curve_identity() {
  Outcome o;
  int configs = 0;
  for (const double tti : kTableTtis) {
    const auto radio = RadioConfig::with_tti(tti);
    const double gate = std::max(ds_grant_latency(radio), fa_grant_latency(radio));
    for (const double t_ib : inter_arrival_grid()) {
      if (!(t_ib > gate + kTimeEps)) continue;
      ++configs;
      const auto h = haptic(t_ib);
      for (int i = 0; i < 1000; ++i) {
        const double u = 3.0 * h.t_p * i / 999.0;
        const double ds = beta_lo(Scheme::DynamicScheduling, radio, h, u);
        const double fa = beta_lo(Scheme::FastUplink, radio, h, u);
        o.require(std::abs(ds - fa) <= 1e-12 * std::max(std::abs(ds), std::abs(fa)),
                  fmt::format("tti={} t_ib={} u={}: {} vs {}", tti, t_ib, u, ds, fa));
      }
    }
  }
  o.detail = fmt::format("{} configs x 1000 points over [0, 3 t_p]", configs);
  return o;
}

Outcome bound_validity() {
  Outcome o;
  constexpr double horizon = 3.2e4;
  const std::uint64_t seeds[] = {1, 2, 3, 4, 5};
  std::size_t min_packets = SIZE_MAX;
  double worst_ratio = 0.0;
  double worst_wait_ratio = 0.0;
  std::vector<std::string> per_scheme;
  for (const auto s : kAllSchemes) {
    SimConfig c;
    c.scheme = s;
    c.horizon = horizon;
    double scheme_ratio = 0.0;
    for (const auto seed : seeds) {
      c.seed = seed;
      const auto r = run(c);
      min_packets = std::min(min_packets, r.leftover_delays.size());
      o.require(r.leftover_delays.size() >= 120000,
                fmt::format("{} seed {}: only {} packets", to_string(s), seed, r.leftover_delays.size()));
      for (const double eps : kCompareEpsilons) {
        const auto b = delay_bound(s, c.radio, c.haptic, c.leftover, eps);
        const double q = empirical_quantile(r.leftover_delays, 1.0 - eps);
        const double w = empirical_quantile(r.leftover_waits, 1.0 - eps);
        scheme_ratio = std::max(scheme_ratio, q / b.d0);
        worst_ratio = std::max(worst_ratio, q / b.d0);
        worst_wait_ratio = std::max(worst_wait_ratio, w / b.d0);
        o.require(q <= b.d0, fmt::format("{} seed {} eps={}: quantile {:.6f} s > bound {:.6f} s", to_string(s), seed,
                                         eps, q, b.d0));
      }
    }
    per_scheme.push_back(fmt::format("{} {:.3f}", to_string(s), scheme_ratio));
  }
  o.detail = fmt::format(
      "20 runs, >= {} packets each; worst quantile/bound: {}; arrival-to-first-bit worst ratio {:.3f}", min_packets,
      fmt::join(per_scheme, ", "), worst_wait_ratio);
  return o;
}

Outcome srr_beats_sps() {
  Outcome o;
  const auto radio = RadioConfig::with_tti(0.125e-3, 4.0);
  const LeftoverTrafficModel leftover;
  const auto sps = delay_bound(Scheme::SemiPersistent, radio, haptic(2e-3), leftover, 1e-5);
  const auto srr = delay_bound(Scheme::SoftResourceReservation, radio, haptic(2e-3), leftover, 1e-5);
  o.require(srr.d0 < sps.d0, fmt::format("SRR {} s >= SPS {} s", srr.d0, sps.d0));
  const double reduction = 100.0 * (1.0 - srr.d0 / sps.d0);
  o.detail = fmt::format("SRR {:.6f} s < SPS {:.6f} s; reduction {:.2f}% ({} the 25 +/- 15 point target)", srr.d0,
                         sps.d0, reduction, std::abs(reduction - 25.0) <= 15.0 ? "inside" : "outside");
  return o;
}

Outcome oracle_equivalence() {
  Outcome o;
  int points = 0;
  for (const auto s : {Scheme::DynamicScheduling, Scheme::FastUplink, Scheme::SemiPersistent}) {
    for (const double tti : kTableTtis) {
      for (const double t_ib : {1.0e-3, 1.3e-3, 2.0e-3, 3.0e-3}) {
        SimConfig c;
        c.radio = RadioConfig::with_tti(tti);
        c.haptic = haptic(t_ib);
        c.scheme = s;
        c.horizon = 20.0;
        std::ostringstream log;
        const bool ok = validate_against_walk(c, &log);
        o.require(ok, log.str().substr(0, log.str().find('\n')));
        ++points;
      }
    }
  }
  o.detail = fmt::format("{} slot-aligned configs", points);
  return o;
}

std::string run_to_file(const ExperimentSpec& spec, const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    std::ostringstream diag;
    run_experiment(spec, out, diag);
  }
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "hapsched_acceptance";
  std::filesystem::create_directories(dir);

  ExperimentSpec sweep;
  sweep.mode = Mode::Sweep;
  sweep.sweep_axis = SweepAxis::InterArrival;
  sweep.sweep_from = 1e-3;
  sweep.sweep_to = 3e-3;
  sweep.sweep_steps = 41;
  sweep.workers = 3;

  ExperimentSpec simulate;
  simulate.mode = Mode::Simulate;
  simulate.seeds = {1, 2};
  simulate.horizon = 50.0;
  simulate.workers = 2;

  std::size_t bytes = 0;
  for (const auto& [name, spec] : {std::pair{"sweep", sweep}, std::pair{"simulate", simulate}}) {
    const auto a = run_to_file(spec, dir / fmt::format("{}_a.csv", name));
    const auto b = run_to_file(spec, dir / fmt::format("{}_b.csv", name));
    o.require(!a.empty() && a == b, fmt::format("{} output differs between runs", name));
    bytes += a.size();
  }
  std::filesystem::remove_all(dir);
  o.detail = fmt::format("sweep and simulate repeated, {} bytes compared", bytes);
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double time_limit_s;  // 0: none
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "access-delay constants", 1.0, access_delay_constants},
      {2, "DS drop threshold", 5.0, ds_drop_threshold},
      {3, "FA zero drop (walk and simulator)", 60.0, fa_zero_drop},
      {4, "SPS/SRR usable regions", 0.0, reserved_usable_regions},
      {5, "remainder-of-service orderings", 5.0, remainder_orderings},
      {6, "DS and FA service curves identical", 0.0, ds_fa_curve_identity},
      {7, "delay bound holds in simulation", 0.0, bound_validity},
      {8, "SRR bound below SPS bound", 0.0, srr_beats_sps},
      {9, "simulator matches drop walk", 120.0, oracle_equivalence},
      {10, "deterministic output", 0.0, determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && elapsed > c.time_limit_s) {
      o.pass = false;
      o.notes.push_back(fmt::format("took {:.2f} s, limit {} s", elapsed, c.time_limit_s));
    }
    failed += o.pass ? 0 : 1;
    std::cout << fmt::format("[{}] criterion {:>2} {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", c.number, c.name,
                             o.detail, elapsed);
    for (const auto& note : o.notes) std::cout << "         " << note << '\n';
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
