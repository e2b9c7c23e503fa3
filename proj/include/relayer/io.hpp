// CSV/JSON serialization and provenance blocks for command output.

#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "relayer/dynamics.hpp"
#include "relayer/equilibrium.hpp"
#include "relayer/game.hpp"
#include "relayer/montecarlo.hpp"
#include "relayer/robustness.hpp"

namespace relayer {

inline constexpr const char* kArtifactName = "relayer-game";
inline constexpr const char* kArtifactVersion = "0.1.0";

/// 12 significant digits, shortest general form, independent of locale.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

using Json = nlohmann::ordered_json;

inline Json to_json(const GameParams& g) {
  return Json{{"N", g.relayers},
              {"b", g.reward},
              {"c_f", g.first_cost},
              {"c_l", g.late_cost},
              {"p", g.penalty}};
}

inline Json to_json(const SolverConfig& c) {
  return Json{{"tolerance", c.tolerance},
              {"max_iterations", c.max_iterations},
              {"bracket_floor", c.bracket_floor}};
}

inline Json to_json(const EquilibriumReport& r) {
  return Json{{"q_star", r.q_star},
              {"outage", r.outage},
              {"reward", r.reward},
              {"residual_h", r.residual_h},
              {"residual_gain", r.residual_gain},
              {"iterations", r.iterations},
              {"bracket", {r.bracket_low, r.bracket_high}}};
}

inline Json to_json(const SimulationStats& s) {
  return Json{{"rounds", s.rounds},
              {"seed", s.seed},
              {"mean_payoff_per_group", s.group_mean},
              {"mean_payoff_per_player", s.player_mean},
              {"group_of_player", s.group_of},
              {"outage_rate", s.outage_rate},
              {"outage_count", s.outage_count},
              {"first_uploader_histogram", s.first_uploader_histogram},
              {"standard_errors",
               {{"mean_payoff_per_group", s.group_se},
                {"mean_payoff_per_player", s.player_se},
                {"outage_rate", s.outage_se}}},
              {"payoff_support_violations", s.support_violations}};
}

inline Json to_json(const UniformityTest& t) {
  return Json{{"statistic", t.statistic},
              {"degrees_of_freedom", t.degrees_of_freedom},
              {"p_value", t.p_value},
              {"significance", t.significance},
              {"passed", t.passed}};
}

inline Json to_json(const GapMinimum& m) {
  return Json{{"k", m.mutants}, {"min_gap", m.min_gap}, {"argmin_q_m", m.argmin_q_m}};
}

inline Json to_json(const BarrierReport& b) {
  Json per_k = Json::array();
  for (std::size_t i = 0; i < b.per_k.size(); ++i) {
    per_k.push_back({{"k", b.per_k[i].mutants},
                     {"min_gap", b.per_k[i].min_gap},
                     {"argmin_q_m", b.per_k[i].argmin_q_m},
                     {"upper", to_json(b.per_k_upper[i])},
                     {"lower", to_json(b.per_k_lower[i])}});
  }
  Json j{{"invasion_barrier", b.barrier},
         {"barrier_mutants", b.mutants},
         {"upper_barrier", b.upper_barrier},
         {"lower_barrier", b.lower_barrier}};
  if (!b.per_k.empty()) {
    j["argmin_q_m"] = b.per_k.front().argmin_q_m;
    j["min_gap_single_mutant"] = b.per_k.front().min_gap;
  }
  j["per_k"] = std::move(per_k);
  return j;
}

inline Json to_json(const RobustnessReport& r) {
  Json j{{"resident_payoff", r.resident_payoff},
         {"mutant_payoff", r.mutant_payoff},
         {"gap_D", r.gap}};
  j["stake_loss_threshold"] =
      r.stake_loss_threshold ? Json(*r.stake_loss_threshold) : Json(nullptr);
  j["invasion_barrier"] = r.invasion_barrier;
  return j;
}

/// Extra key/value provenance entries, already formatted.
using MetaEntries = std::vector<std::pair<std::string, std::string>>;

inline Json provenance_json(const std::string& command, const GameParams& g,
                            const SolverConfig& cfg, const MetaEntries& extra = {}) {
  Json j{{"artifact", kArtifactName},
         {"version", kArtifactVersion},
         {"command", command},
         {"params", to_json(g)},
         {"solver", to_json(cfg)}};
  for (const auto& [k, v] : extra) j[k] = v;
  return j;
}

inline void write_provenance_csv(std::ostream& os, const std::string& command,
                                 const GameParams& g, const SolverConfig& cfg,
                                 const MetaEntries& extra = {}) {
  os << "# artifact: " << kArtifactName << ' ' << kArtifactVersion << '\n'
     << "# command: " << command << '\n'
     << "# params: N=" << g.relayers << " b=" << format_number(g.reward)
     << " c_f=" << format_number(g.first_cost) << " c_l=" << format_number(g.late_cost)
     << " p=" << format_number(g.penalty) << '\n'
     << "# solver: tolerance=" << format_number(cfg.tolerance)
     << " max_iterations=" << cfg.max_iterations
     << " bracket_floor=" << format_number(cfg.bracket_floor) << '\n';
  for (const auto& [k, v] : extra) os << "# " << k << ": " << v << '\n';
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << "time,q_u\n";
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    os << format_number(tr.times[i]) << ',' << format_number(tr.values[i]) << '\n';
}

inline void write_coalition_csv(std::ostream& os, const std::vector<CoalitionPoint>& rows) {
  os << "alpha,k,resident_payoff,mutant_payoff,baseline\n";
  for (const auto& r : rows)
    os << format_number(r.alpha) << ',' << r.mutants << ',' << format_number(r.resident)
       << ',' << format_number(r.mutant) << ',' << format_number(r.baseline) << '\n';
}

inline std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "none";
}

}  // namespace relayer
