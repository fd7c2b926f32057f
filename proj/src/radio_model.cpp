#include "hapsched/radio_model.hpp"

#include <cmath>

#include <fmt/format.h>

namespace hapsched {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string out = "invalid configuration";
  for (const auto& issue : issues) {
    out += "\n  ";
    out += issue;
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::DynamicScheduling: return "DS";
    case Scheme::SemiPersistent: return "SPS";
    case Scheme::SoftResourceReservation: return "SRR";
    case Scheme::FastUplink: return "FA";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  for (auto s : kAllSchemes) {
    if (name == to_string(s)) return s;
  }
  throw ConfigError(fmt::format("unknown scheme '{}' (expected DS, SPS, SRR or FA)", name));
}

long long stable_floor(double ratio) {
  return static_cast<long long>(std::floor(ratio + 1e-9));
}

long long stable_ceil(double ratio) {
  return static_cast<long long>(std::ceil(ratio - 1e-9));
}

RadioConfig RadioConfig::with_tti(double tti, double pg_multiple) {
  RadioConfig config;
  config.tti = tti;
  config.t_sr = tti;
  config.t_pg = pg_multiple * tti;
  return config;
}

std::vector<std::string> RadioConfig::violations() const {
  std::vector<std::string> issues;
  if (n_channels < 1) issues.push_back(fmt::format("radio.n_channels must be >= 1 (got {})", n_channels));
  if (!(total_rate > 0)) issues.push_back(fmt::format("radio.total_rate must be > 0 (got {})", total_rate));
  if (!(tti > 0)) issues.push_back(fmt::format("radio.tti must be > 0 (got {})", tti));
  if (!(t_sr > 0)) issues.push_back(fmt::format("radio.t_sr must be > 0 (got {})", t_sr));
  if (!(t_pg > 0)) {
    issues.push_back(fmt::format("radio.t_pg must be > 0 (got {})", t_pg));
  } else if (tti > 0 && t_pg < tti - kTimeEps) {
    issues.push_back(fmt::format("radio.t_pg ({} s) must be >= radio.tti ({} s)", t_pg, tti));
  }
  if (!(haptic_demand_norm >= 0)) {
    issues.push_back(fmt::format("radio.haptic_demand_norm must be >= 0 (got {})", haptic_demand_norm));
  }
  if (issues.empty()) {
    const auto m = stable_ceil(n_channels * haptic_demand_norm / tti);
    if (m > n_channels) {
      issues.push_back(fmt::format(
          "radio.haptic_demand_norm: a haptic packet needs {} blocks but only {} channels exist at tti={} s",
          m, n_channels, tti));
    }
  }
  return issues;
}

void RadioConfig::validate() const {
  if (auto issues = violations(); !issues.empty()) throw ConfigError(std::move(issues));
}

int m_blocks(const RadioConfig& config) {
  config.validate();
  return static_cast<int>(stable_ceil(config.n_channels * config.haptic_demand_norm / config.tti));
}

double ds_grant_latency(const RadioConfig& config) {
  config.validate();
  return config.t_sr + 3.0 * config.tti;
}

double fa_grant_latency(const RadioConfig& config) {
  config.validate();
  return config.tti;
}

double haptic_access_delay(Scheme scheme, const RadioConfig& config, bool in_burst) {
  config.validate();
  const double ds = config.t_sr + 6.0 * config.tti;
  const double sps = config.t_pg + 4.0 * config.tti;
  switch (scheme) {
    case Scheme::DynamicScheduling: return ds;
    case Scheme::SemiPersistent: return sps;
    case Scheme::SoftResourceReservation: return in_burst ? sps : ds;
    case Scheme::FastUplink: return 4.0 * config.tti;
  }
  return ds;
}

}  // namespace hapsched
