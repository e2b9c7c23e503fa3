// Finite-population resident/mutant analysis.
//
// k of the N relayers (the mutants) upload with q_m while the rest (the
// residents) keep q_r. A player's opponents' upload count is then the sum
// of two independent binomials, which gives exact group payoffs.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "relayer/binomial.hpp"
#include "relayer/equilibrium.hpp"
#include "relayer/game.hpp"

namespace relayer {

struct PopulationSplit {
  int relayers = 0;
  int mutants = 0;  // k
  double mutant_q = 0.0;
  double resident_q = 0.0;

  double epsilon() const { return static_cast<double>(mutants) / relayers; }
};

inline void validate(const PopulationSplit& s) {
  if (s.mutants < 0 || s.mutants > s.relayers)
    throw std::invalid_argument("mutant count must lie in [0, N]");
  detail::require_probability(s.mutant_q, "mutant upload probability");
  detail::require_probability(s.resident_q, "resident upload probability");
}

/// Expected payoff of playing `action` when exactly m opponents upload.
inline double payoff_vs_m_uploaders(const GameParams& g, Action action, int m) {
  if (m < 0 || m > g.relayers - 1)
    throw std::invalid_argument("opponent upload count must lie in [0, N-1]");
  if (action == Action::NoUpload) return m >= 1 ? g.reward : -g.penalty;
  return (g.reward - g.first_cost) / (m + 1.0) +
         m / (m + 1.0) * (g.reward - g.late_cost);
}

namespace detail {
inline double mixed_payoff_against(const GameParams& g, double own_q,
                                   const std::vector<double>& opponents) {
  double u = 0.0;
  for (std::size_t m = 0; m < opponents.size(); ++m) {
    const int mi = static_cast<int>(m);
    u += opponents[m] * (own_q * payoff_vs_m_uploaders(g, Action::Upload, mi) +
                         (1.0 - own_q) * payoff_vs_m_uploaders(g, Action::NoUpload, mi));
  }
  return u;
}
}  // namespace detail

struct GroupPayoffs {
  std::optional<double> resident;  // absent when k = N
  std::optional<double> mutant;    // absent when k = 0
};

inline GroupPayoffs expected_payoffs(const GameParams& g, const PopulationSplit& s) {
  validate(s);
  if (s.relayers != g.relayers)
    throw std::invalid_argument("population size differs from N");
  const int n = g.relayers;
  const int k = s.mutants;
  GroupPayoffs out;
  if (k <= n - 1)
    out.resident = detail::mixed_payoff_against(
        g, s.resident_q, binomial_mixture_pmf(k, s.mutant_q, n - 1 - k, s.resident_q));
  if (k >= 1)
    out.mutant = detail::mixed_payoff_against(
        g, s.mutant_q, binomial_mixture_pmf(k - 1, s.mutant_q, n - k, s.resident_q));
  return out;
}

/// D = resident payoff - mutant payoff with residents at q_star and k
/// mutants at q_m (epsilon = k/N). Requires 1 <= k <= N-1.
inline double payoff_gap(const GameParams& g, double q_star, double q_m, int mutants) {
  if (mutants < 1 || mutants > g.relayers - 1)
    throw std::invalid_argument("payoff gap needs 1 <= k <= N-1 mutants");
  const auto p = expected_payoffs(g, {g.relayers, mutants, q_m, q_star});
  return *p.resident - *p.mutant;
}

/// Epsilon form; epsilon must be an exact multiple of 1/N.
inline double payoff_gap(const GameParams& g, double q_star, double q_m, double epsilon) {
  const double k = epsilon * g.relayers;
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9)
    throw std::invalid_argument("epsilon must be a multiple of 1/N");
  return payoff_gap(g, q_star, q_m, static_cast<int>(kr));
}

struct GapMinimum {
  int mutants = 0;
  double min_gap = 0.0;
  double argmin_q_m = 0.0;
};

struct BarrierReport {
  /// Largest k/N such that residents strictly beat every mutant strategy
  /// for all mutant counts up to k. Zero if already k = 1 admits a mutant
  /// that does at least as well as the residents.
  double barrier = 0.0;
  int mutants = 0;
  /// Same, restricted to mutants that upload more often than q_star.
  double upper_barrier = 0.0;
  /// Same, restricted to mutants that upload less often than q_star.
  double lower_barrier = 0.0;
  std::vector<GapMinimum> per_k;        // all mutant strategies
  std::vector<GapMinimum> per_k_upper;  // q_m > q_star
  std::vector<GapMinimum> per_k_lower;  // q_m < q_star
};

namespace detail {

// Grid minimum of D over q_m in [lo, hi] excluding q_star itself, then a
// Brent refinement in the neighbouring cells when those cells stay clear of
// q_star (D vanishes at q_star, so refining towards it is meaningless).
inline GapMinimum minimize_gap(const GameParams& g, double q_star, int k,
                               double step, double lo, double hi) {
  GapMinimum best{k, std::numeric_limits<double>::infinity(), lo};
  const auto cells = static_cast<long>(std::llround(1.0 / step));
  for (long i = 0; i <= cells; ++i) {
    const double q = std::min(1.0, i * (1.0 / cells));
    if (q < lo || q > hi) continue;
    if (std::abs(q - q_star) <= 1e-12) continue;
    const double d = payoff_gap(g, q_star, q, k);
    if (d < best.min_gap) best = {k, d, q};
  }
  if (!std::isfinite(best.min_gap)) return best;

  double a = std::max(lo, best.argmin_q_m - step);
  double b = std::min(hi, best.argmin_q_m + step);
  if (q_star > a - step && q_star < b + step) return best;
  if (b - a <= 0.0) return best;
  const auto [qm, dm] = boost::math::tools::brent_find_minima(
      [&](double q) { return payoff_gap(g, q_star, q, k); }, a, b, 40);
  if (dm < best.min_gap) best = {k, dm, qm};
  return best;
}

inline double down_closed_barrier(const std::vector<GapMinimum>& per_k, int n,
                                  int* mutants_out = nullptr) {
  int k_ok = 0;
  for (const auto& m : per_k) {
    if (!(m.min_gap > 0.0)) break;
    k_ok = m.mutants;
  }
  if (mutants_out) *mutants_out = k_ok;
  return static_cast<double>(k_ok) / n;
}

}  // namespace detail

/// Invasion barrier over mutant counts k = 1..N-1 and a q_m grid of the
/// given step.
inline BarrierReport invasion_barrier(const GameParams& g, double q_star,
                                      double q_m_step = 1e-3) {
  validate(g);
  if (!(q_m_step > 0.0 && q_m_step <= 1e-3))
    throw std::invalid_argument("mutant strategy grid step must lie in (0, 0.001]");
  BarrierReport rep;
  const int n = g.relayers;
  for (int k = 1; k <= n - 1; ++k) {
    const auto upper = detail::minimize_gap(g, q_star, k, q_m_step, q_star, 1.0);
    const auto lower = detail::minimize_gap(g, q_star, k, q_m_step, 0.0, q_star);
    rep.per_k_upper.push_back(upper);
    rep.per_k_lower.push_back(lower);
    rep.per_k.push_back(upper.min_gap <= lower.min_gap ? upper : lower);
  }
  rep.barrier = detail::down_closed_barrier(rep.per_k, n, &rep.mutants);
  rep.upper_barrier = detail::down_closed_barrier(rep.per_k_upper, n);
  rep.lower_barrier = detail::down_closed_barrier(rep.per_k_lower, n);
  return rep;
}

// ---------------------------------------------------------------------------
// Coalition abstention: k relayers stop uploading altogether.

struct CoalitionPoint {
  double alpha = 0.0;  // k / N
  int mutants = 0;
  double resident = 0.0;
  double mutant = 0.0;
  double baseline = 0.0;  // everyone at q_star
};

inline CoalitionPoint coalition_point(const GameParams& g, double q_star, int k) {
  if (k < 1 || k > g.relayers - 1)
    throw std::invalid_argument("coalition size must lie in [1, N-1]");
  const auto dev = expected_payoffs(g, {g.relayers, k, 0.0, q_star});
  const auto base = expected_payoffs(g, {g.relayers, 0, 0.0, q_star});
  return {static_cast<double>(k) / g.relayers, k, *dev.resident, *dev.mutant,
          *base.resident};
}

/// k = round(alpha N), which must fall in [1, N-1].
inline CoalitionPoint coalition_abstention(const GameParams& g, double q_star,
                                           double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("coalition fraction must lie in (0, 1)");
  return coalition_point(g, q_star, static_cast<int>(std::lround(alpha * g.relayers)));
}

inline std::vector<CoalitionPoint> coalition_scan(const GameParams& g, double q_star) {
  std::vector<CoalitionPoint> rows;
  for (int k = 1; k <= g.relayers - 1; ++k) rows.push_back(coalition_point(g, q_star, k));
  return rows;
}

/// Smallest k/N at which residents facing an abstaining coalition expect a
/// negative payoff.
inline std::optional<double> stake_loss_threshold(const GameParams& g, double q_star) {
  for (const auto& row : coalition_scan(g, q_star))
    if (row.resident < 0.0) return row.alpha;
  return std::nullopt;
}

enum class Group { Resident, Mutant };

/// First alpha where the group's payoff crosses zero, linearly interpolated
/// between consecutive coalition sizes.
inline std::optional<double> payoff_zero_crossing(const std::vector<CoalitionPoint>& rows,
                                                  Group group) {
  auto value = [&](const CoalitionPoint& r) {
    return group == Group::Resident ? r.resident : r.mutant;
  };
  if (rows.empty()) return std::nullopt;
  if (value(rows.front()) < 0.0) return rows.front().alpha;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double v0 = value(rows[i - 1]);
    const double v1 = value(rows[i]);
    if (v0 >= 0.0 && v1 < 0.0)
      return rows[i - 1].alpha + (rows[i].alpha - rows[i - 1].alpha) * v0 / (v0 - v1);
  }
  return std::nullopt;
}

struct RobustnessReport {
  double resident_payoff = 0.0;
  double mutant_payoff = 0.0;
  double gap = 0.0;
  std::optional<double> stake_loss_threshold;
  double invasion_barrier = 0.0;
};

inline RobustnessReport robustness_report(const GameParams& g, double q_star,
                                          int mutants, double q_m) {
  const auto p = expected_payoffs(g, {g.relayers, mutants, q_m, q_star});
  RobustnessReport rep;
  rep.resident_payoff = p.resident.value_or(0.0);
  rep.mutant_payoff = p.mutant.value_or(0.0);
  rep.gap = rep.resident_payoff - rep.mutant_payoff;
  rep.stake_loss_threshold = stake_loss_threshold(g, q_star);
  rep.invasion_barrier = invasion_barrier(g, q_star).barrier;
  return rep;
}

}  // namespace relayer
