// Parameter sweeps of the equilibrium metrics along one axis.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "relayer/equilibrium.hpp"
#include "relayer/io.hpp"

namespace relayer {

enum class SweepAxis { Relayers, FirstCost, LateCost, Penalty };

inline SweepAxis parse_axis(const std::string& s) {
  if (s == "N" || s == "n") return SweepAxis::Relayers;
  if (s == "c_f" || s == "cf") return SweepAxis::FirstCost;
  if (s == "c_l" || s == "cl") return SweepAxis::LateCost;
  if (s == "p") return SweepAxis::Penalty;
  throw InvalidParams("unknown sweep axis '" + s + "' (expected N, c_f, c_l or p)");
}

inline const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::Relayers: return "N";
    case SweepAxis::FirstCost: return "c_f";
    case SweepAxis::LateCost: return "c_l";
    case SweepAxis::Penalty: return "p";
  }
  return "?";
}

inline const std::vector<std::string>& sweep_output_names() {
  static const std::vector<std::string> names{"q_star", "outage", "reward"};
  return names;
}

struct SweepSpec {
  GameParams base;
  SweepAxis axis = SweepAxis::Relayers;
  std::vector<double> values;
  std::vector<std::string> outputs = sweep_output_names();
};

/// Inclusive arithmetic range; the end point is kept when it lies on the
/// grid up to rounding.
inline std::vector<double> range_values(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start))
    throw InvalidParams("range needs step > 0 and stop >= start");
  const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw InvalidParams("range has too many points");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(count));
  for (long i = 0; i < count; ++i) v.push_back(start + static_cast<double>(i) * step);
  return v;
}

/// "start:stop:step" or a comma-separated list.
inline std::vector<double> parse_values(const std::string& s) {
  auto to_double = [](const std::string& t) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &pos);
    } catch (const std::exception&) {
      throw InvalidParams("cannot parse number '" + t + "'");
    }
    if (pos != t.size()) throw InvalidParams("cannot parse number '" + t + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = s.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) parts.push_back(item);
  if (sep == ':') {
    if (parts.size() != 3) throw InvalidParams("range must be start:stop:step");
    return range_values(to_double(parts[0]), to_double(parts[1]), to_double(parts[2]));
  }
  std::vector<double> v;
  for (const auto& p : parts) v.push_back(to_double(p));
  if (v.empty()) throw InvalidParams("empty value list");
  return v;
}

inline void validate(const SweepSpec& spec) {
  if (spec.values.empty()) throw InvalidParams("sweep has no values");
  for (const auto& o : spec.outputs)
    if (std::find(sweep_output_names().begin(), sweep_output_names().end(), o) ==
        sweep_output_names().end())
      throw InvalidParams("unknown sweep output '" + o + "'");
}

/// Parameters at one sweep value; throws InvalidParams for invalid points.
inline GameParams sweep_point(const SweepSpec& spec, double value) {
  GameParams g = spec.base;
  switch (spec.axis) {
    case SweepAxis::Relayers:
      if (value != std::floor(value))
        throw InvalidParams("N must be an integer, got " + format_number(value));
      g.relayers = static_cast<int>(value);
      break;
    case SweepAxis::FirstCost: g.first_cost = value; break;
    case SweepAxis::LateCost: g.late_cost = value; break;
    case SweepAxis::Penalty: g.penalty = value; break;
  }
  validate(g);
  return g;
}

struct SweepRow {
  double axis_value = 0.0;
  std::optional<EquilibriumReport> report;
  std::string error;
};

/// Evaluates every point, possibly concurrently. Rows come back in the
/// order of spec.values; failing points carry an error message instead of
/// a report.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SolverConfig& cfg = {},
                                       unsigned threads = 0) {
  validate(spec);
  validate(cfg);
  std::vector<SweepRow> rows(spec.values.size());
  auto eval = [&](std::size_t i) {
    rows[i].axis_value = spec.values[i];
    try {
      rows[i].report = solve_equilibrium(sweep_point(spec, spec.values[i]), cfg);
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, rows.size()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) eval(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < rows.size();) eval(i);
      });
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& os, const SweepSpec& spec, const SolverConfig& cfg,
                            const std::vector<SweepRow>& rows) {
  write_provenance_csv(os, "sweep", spec.base, cfg, {{"axis", axis_name(spec.axis)}});
  os << "axis_value";
  for (const auto& o : spec.outputs) os << ',' << o;
  os << ",residual,error\n";
  for (const auto& r : rows) {
    os << format_number(r.axis_value);
    for (const auto& o : spec.outputs) {
      os << ',';
      if (!r.report) continue;
      if (o == "q_star") os << format_number(r.report->q_star);
      if (o == "outage") os << format_number(r.report->outage);
      if (o == "reward") os << format_number(r.report->reward);
    }
    os << ',';
    if (r.report) os << format_number(r.report->residual_h);
    os << ',';
    // Commas would break the column layout.
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    os << err << '\n';
  }
}

}  // namespace relayer
