#include "hapsched/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

namespace hapsched {

namespace {

std::string trimmed_lower(std::string_view text) {
  std::string s(text);
  boost::algorithm::trim(s);
  boost::algorithm::to_lower(s);
  return s;
}

// Splits "12.5ms" into 12.5 and "ms".
std::pair<double, std::string> number_and_unit(std::string_view text) {
  const std::string s = trimmed_lower(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr == s.data()) throw ConfigError(fmt::format("not a number: '{}'", text));
  std::string unit(ptr, s.data() + s.size());
  boost::algorithm::trim(unit);
  return {value, unit};
}

double parse_real(std::string_view text) {
  const auto [value, unit] = number_and_unit(text);
  if (!unit.empty()) throw ConfigError(fmt::format("not a number: '{}'", text));
  return value;
}

int parse_int(std::string_view text) {
  const std::string s = trimmed_lower(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("not an integer: '{}'", text));
  }
  return value;
}

// Drops a trailing "; ..." or "# ..." comment.
std::string without_comment(const std::string& value) {
  for (std::size_t i = 0; i < value.size(); ++i) {
    if ((value[i] == ';' || value[i] == '#') && (i == 0 || value[i - 1] == ' ' || value[i - 1] == '\t')) {
      return boost::algorithm::trim_copy(value.substr(0, i));
    }
  }
  return boost::algorithm::trim_copy(value);
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::Bound: return "bound";
    case Mode::Drop: return "drop";
    case Mode::Remainder: return "remainder";
    case Mode::Simulate: return "simulate";
    case Mode::Sweep: return "sweep";
    case Mode::Compare: return "compare";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (auto m : {Mode::Bound, Mode::Drop, Mode::Remainder, Mode::Simulate, Mode::Sweep, Mode::Compare}) {
    if (trimmed_lower(name) == to_string(m)) return m;
  }
  throw ConfigError(fmt::format("unknown mode '{}'", name));
}

std::string_view to_string(SweepAxis axis) { return axis == SweepAxis::Tti ? "tti" : "t_ib"; }

SweepAxis parse_sweep_axis(std::string_view name) {
  const auto s = trimmed_lower(name);
  if (s == "t_ib") return SweepAxis::InterArrival;
  if (s == "tti") return SweepAxis::Tti;
  throw ConfigError(fmt::format("unknown sweep parameter '{}' (t_ib | tti)", name));
}

Duration parse_duration(std::string_view text) {
  const auto [value, unit] = number_and_unit(text);
  if (unit.empty() || unit == "s") return Duration::seconds(value);
  if (unit == "ms") return Duration::seconds(value * 1e-3);
  if (unit == "us") return Duration::seconds(value * 1e-6);
  if (unit == "tti") return Duration::ttis(value);
  throw ConfigError(fmt::format("unknown time unit '{}' in '{}' (s, ms, us, tti)", unit, text));
}

double parse_seconds(std::string_view text) {
  const auto d = parse_duration(text);
  if (d.in_tti) throw ConfigError(fmt::format("'{}': a tti multiple is not allowed here", text));
  return d.value;
}

double parse_bits(std::string_view text) {
  const auto [value, unit] = number_and_unit(text);
  if (unit.empty() || unit == "bits" || unit == "bit" || unit == "b") return value;
  if (unit == "bytes" || unit == "byte") return value * 8.0;
  throw ConfigError(fmt::format("unknown size unit '{}' in '{}' (bits, bytes)", unit, text));
}

namespace {

template <typename T, typename F>
std::vector<T> parse_list(std::string_view text, F&& parse_one) {
  std::vector<std::string> parts;
  std::string s(text);
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  std::vector<T> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(parse_one(p));
  }
  return out;
}

}  // namespace

std::vector<double> parse_seconds_list(std::string_view text) {
  return parse_list<double>(text, [](const std::string& p) { return parse_seconds(p); });
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  return parse_list<std::uint64_t>(text, [](const std::string& p) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (ec != std::errc{} || ptr != p.data() + p.size()) throw ConfigError(fmt::format("bad seed '{}'", p));
    return v;
  });
}

std::vector<Scheme> parse_scheme_list(std::string_view text) {
  return parse_list<Scheme>(text, [](const std::string& p) { return parse_scheme(boost::algorithm::to_upper_copy(p)); });
}

RadioConfig ExperimentSpec::radio_at(double tti) const {
  RadioConfig r = radio;
  r.tti = tti;
  r.t_sr = t_sr.resolve(tti);
  r.t_pg = t_pg.resolve(tti);
  return r;
}

std::vector<double> ExperimentSpec::sweep_points() const {
  if (!sweep_axis) return {};
  if (!sweep_values.empty()) return sweep_values;
  std::vector<double> points;
  if (sweep_steps < 2) return points;
  for (int i = 0; i < sweep_steps; ++i) {
    const double f = static_cast<double>(i) / (sweep_steps - 1);
    points.push_back(i == sweep_steps - 1 ? sweep_to : sweep_from + f * (sweep_to - sweep_from));
  }
  return points;
}

std::vector<GridPoint> ExperimentSpec::grid() const {
  if (!sweep_axis) return {{radio_at(radio.tti), haptic}};
  std::vector<GridPoint> points;
  for (const double v : sweep_points()) {
    GridPoint p{radio_at(radio.tti), haptic};
    if (*sweep_axis == SweepAxis::Tti) {
      p.radio = radio_at(v);
    } else {
      p.haptic.t_ib = v;
    }
    points.push_back(p);
  }
  return points;
}

std::vector<std::string> ExperimentSpec::violations() const {
  std::vector<std::string> issues;
  if (schemes.empty()) issues.emplace_back("experiment.schemes: at least one scheme is required");
  if (!(epsilon > 0 && epsilon < 1)) issues.push_back(fmt::format("snc.epsilon must be in (0, 1) (got {})", epsilon));
  if (seeds.empty()) issues.emplace_back("experiment.seeds: at least one seed is required");
  if (workers < 1) issues.push_back(fmt::format("experiment.workers must be >= 1 (got {})", workers));
  if (!(horizon > 0)) issues.push_back(fmt::format("experiment.horizon must be > 0 (got {})", horizon));
  if (mode == Mode::Sweep && !sweep_axis) issues.emplace_back("experiment.sweep_param is required for a sweep");
  if (sweep_axis) {
    if (sweep_values.empty()) {
      if (sweep_steps < 2) issues.push_back(fmt::format("experiment.steps must be >= 2 (got {})", sweep_steps));
      if (!(sweep_from > 0)) issues.push_back(fmt::format("experiment.from must be > 0 (got {})", sweep_from));
      if (!(sweep_to > sweep_from)) {
        issues.push_back(fmt::format("experiment.to ({}) must be greater than experiment.from ({})", sweep_to, sweep_from));
      }
    } else {
      for (std::size_t i = 0; i < sweep_values.size(); ++i) {
        if (!(sweep_values[i] > 0)) issues.push_back(fmt::format("experiment.values[{}] must be > 0", i));
        if (i > 0 && !(sweep_values[i] > sweep_values[i - 1])) {
          issues.push_back(fmt::format("experiment.values must be strictly increasing (index {})", i));
        }
      }
    }
  }
  if (!issues.empty()) return issues;

  for (const auto& p : grid()) {
    for (auto& i : p.radio.violations()) issues.push_back(std::move(i));
    for (auto& i : p.haptic.violations()) issues.push_back(std::move(i));
  }
  for (auto& i : leftover.violations()) issues.push_back(std::move(i));
  std::sort(issues.begin(), issues.end());
  issues.erase(std::unique(issues.begin(), issues.end()), issues.end());
  return issues;
}

void ExperimentSpec::validate() const {
  if (auto issues = violations(); !issues.empty()) throw ConfigError(std::move(issues));
}

ExperimentSpec parse_config(std::istream& in, std::string_view source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source, e.line(), e.message()));
  }

  ExperimentSpec spec;
  std::vector<std::string> issues;

  using Setter = std::function<void(const std::string&)>;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"radio",
       {
           {"n_channels", [&](const std::string& v) { spec.radio.n_channels = parse_int(v); }},
           {"total_rate", [&](const std::string& v) { spec.radio.total_rate = parse_real(v); spec.total_rate_defaulted = false; }},
           {"tti", [&](const std::string& v) { spec.radio.tti = parse_seconds(v); }},
           {"t_sr", [&](const std::string& v) { spec.t_sr = parse_duration(v); }},
           {"t_pg", [&](const std::string& v) { spec.t_pg = parse_duration(v); }},
           {"haptic_demand_norm", [&](const std::string& v) { spec.radio.haptic_demand_norm = parse_seconds(v); spec.demand_defaulted = false; }},
       }},
      {"haptic",
       {
           {"t_p", [&](const std::string& v) { spec.haptic.t_p = parse_seconds(v); }},
           {"t_b", [&](const std::string& v) { spec.haptic.t_b = parse_seconds(v); }},
           {"t_ib", [&](const std::string& v) { spec.haptic.t_ib = parse_seconds(v); }},
           {"t_nb", [&](const std::string& v) { spec.haptic.t_nb = parse_seconds(v); }},
           {"worst_case_excess_burst", [&](const std::string& v) {
              const auto s = trimmed_lower(v);
              if (s != "true" && s != "false") throw ConfigError("expected true or false");
              spec.haptic.worst_case_excess_burst = s == "true";
            }},
       }},
      {"leftover",
       {
           {"lambda_rate", [&](const std::string& v) { spec.leftover.lambda_rate = parse_real(v); }},
           {"sigma", [&](const std::string& v) { spec.leftover.sigma = parse_bits(v); }},
           {"size_distribution", [&](const std::string& v) {
              const auto s = trimmed_lower(v);
              if (s == "deterministic") {
                spec.leftover.size_distribution = SizeDistribution::Deterministic;
              } else if (s == "exponential_mean" || s == "exponentialmean") {
                spec.leftover.size_distribution = SizeDistribution::ExponentialMean;
              } else {
                throw ConfigError("expected deterministic or exponential_mean");
              }
            }},
       }},
      {"snc",
       {
           {"epsilon", [&](const std::string& v) { spec.epsilon = parse_real(v); }},
           {"outage_convention", [&](const std::string& v) { spec.outage_convention = parse_outage_convention(trimmed_lower(v)); }},
       }},
      {"experiment",
       {
           {"mode", [&](const std::string& v) { spec.mode = parse_mode(v); }},
           {"schemes", [&](const std::string& v) { spec.schemes = parse_scheme_list(v); }},
           {"seeds", [&](const std::string& v) { spec.seeds = parse_seed_list(v); }},
           {"horizon", [&](const std::string& v) { spec.horizon = parse_seconds(v); }},
           {"workers", [&](const std::string& v) { spec.workers = parse_int(v); }},
           {"sweep_param", [&](const std::string& v) { spec.sweep_axis = parse_sweep_axis(v); }},
           {"from", [&](const std::string& v) { spec.sweep_from = parse_seconds(v); }},
           {"to", [&](const std::string& v) { spec.sweep_to = parse_seconds(v); }},
           {"steps", [&](const std::string& v) { spec.sweep_steps = parse_int(v); }},
           {"values", [&](const std::string& v) { spec.sweep_values = parse_seconds_list(v); }},
           {"output", [&](const std::string& v) { spec.output = boost::algorithm::trim_copy(v); }},
       }},
  };

  for (const auto& [section, body] : tree) {
    const auto known = keys.find(section);
    if (known == keys.end()) {
      issues.push_back(body.empty() ? fmt::format("{}: key '{}' outside any section", source, section)
                                    : fmt::format("{}: unknown section [{}]", source, section));
      continue;
    }
    for (const auto& [key, value] : body) {
      const auto setter = known->second.find(key);
      if (setter == known->second.end()) {
        issues.push_back(fmt::format("{}: {}.{}: unknown key", source, section, key));
        continue;
      }
      try {
        setter->second(without_comment(value.data()));
      } catch (const ConfigError& e) {
        for (const auto& i : e.issues()) issues.push_back(fmt::format("{}: {}.{}: {}", source, section, key, i));
      } catch (const std::exception&) {
        issues.push_back(fmt::format("{}: {}.{}: cannot parse '{}'", source, section, key, value.data()));
      }
    }
  }
  spec.radio = spec.radio_at(spec.radio.tti);
  for (auto& i : spec.violations()) issues.push_back(fmt::format("{}: {}", source, i));
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  return parse_config(in, path.string());
}

}  // namespace hapsched
