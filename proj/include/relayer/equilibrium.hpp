// Symmetric mixed Nash equilibrium of the relayer upload game, its outage
// and reward metrics, the potential function, and the pure strong
// equilibria.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "relayer/game.hpp"

namespace relayer {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverConfig {
  double tolerance = 1e-12;  // target |h(q)|
  int max_iterations = 200;
  double bracket_floor = 1e-9;  // excludes the spurious root h(0) = 0
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.tolerance > 0.0))
    throw InvalidParams("solver tolerance must be > 0");
  if (cfg.max_iterations < 1)
    throw InvalidParams("solver max_iterations must be >= 1");
  if (!(cfg.bracket_floor > 0.0 && cfg.bracket_floor < 0.5))
    throw InvalidParams("solver bracket_floor must lie in (0, 0.5)");
}

struct EquilibriumReport {
  double q_star = 0.0;
  double outage = 0.0;
  double reward = 0.0;
  double residual_h = 0.0;
  double residual_gain = 0.0;
  int iterations = 0;
  double bracket_low = 0.0;
  double bracket_high = 1.0;
};

/// P_O = (1 - q)^N, the probability that nobody uploads.
inline double outage_probability(const GameParams& g, double q_star) {
  detail::require_probability(q_star, "equilibrium probability");
  return std::pow(1.0 - q_star, g.relayers);
}

/// R*, the expected utility of a relayer at the equilibrium. Abstaining and
/// uploading pay the same there; the abstaining branch is used.
inline double expected_reward(const GameParams& g, double q_star) {
  return v_noupload(g, q_star);
}

/// Bisection for the unique root of h in (bracket_floor, 1).
///
/// h(bracket_floor) > 0 and h(1) = -N c_l + c_l - c_f < 0 for every valid
/// parameter set, so a failing bracket means the parameters were not
/// validated. Iteration stops once |h| <= tolerance or the bracket can no
/// longer be split in double precision.
inline EquilibriumReport solve_equilibrium(const GameParams& g,
                                           const SolverConfig& cfg = {}) {
  validate(g);
  validate(cfg);

  double lo = cfg.bracket_floor;
  double hi = 1.0;
  const double h_lo = h_poly(g, lo);
  const double h_hi = h_poly(g, hi);
  if (!(h_lo > 0.0 && h_hi < 0.0))
    throw SolverError("equilibrium bracket failed: h(" + std::to_string(lo) +
                      ")=" + std::to_string(h_lo) + ", h(1)=" +
                      std::to_string(h_hi));

  EquilibriumReport rep;
  double best = lo;
  double best_h = h_lo;
  bool done = false;
  int it = 0;
  while (it < cfg.max_iterations) {
    ++it;
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) {
      done = true;
      break;
    }
    const double hm = h_poly(g, mid);
    if (std::abs(hm) < std::abs(best_h)) {
      best = mid;
      best_h = hm;
    }
    if (std::abs(hm) <= cfg.tolerance) {
      done = true;
      break;
    }
    if (hm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (!done)
    throw SolverError("bisection did not converge within " +
                      std::to_string(cfg.max_iterations) + " iterations");

  rep.q_star = best;
  rep.outage = outage_probability(g, best);
  rep.reward = expected_reward(g, best);
  rep.residual_h = best_h;
  rep.residual_gain = gain(g, best);
  rep.iterations = it;
  rep.bracket_low = lo;
  rep.bracket_high = hi;
  return rep;
}

/// phi(q) = integral of gain over [0, q], with the additive constant 0.
/// Its derivative is gain, so phi peaks at the equilibrium.
inline double potential(const GameParams& g, double q) {
  detail::require_probability(q, "upload probability");
  if (q == 0.0) return 0.0;
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      [&](double x) { return gain(g, std::clamp(x, 0.0, 1.0)); }, 0.0, q, 15,
      1e-13, &error);
  if (!std::isfinite(value) || error > 1e-8 * (1.0 + std::abs(value)))
    throw SolverError("potential quadrature did not converge");
  return value;
}

/// Grid maximizer of the potential on [0, 1]. Accumulates the integral
/// segment by segment rather than re-integrating from zero.
inline double potential_argmax(const GameParams& g, double step = 1e-4) {
  if (!(step > 0.0 && step <= 0.5))
    throw std::invalid_argument("potential grid step must lie in (0, 0.5]");
  const auto cells = static_cast<int>(std::llround(1.0 / step));
  double phi = 0.0;
  double best_phi = 0.0;
  double best_q = 0.0;
  double prev = 0.0;
  for (int i = 1; i <= cells; ++i) {
    const double q = std::min(1.0, i * (1.0 / cells));
    double error = 0.0;
    phi += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        [&](double x) { return gain(g, std::clamp(x, 0.0, 1.0)); }, prev, q, 10,
        1e-13, &error);
    prev = q;
    if (phi > best_phi) {
      best_phi = phi;
      best_q = q;
    }
  }
  return best_q;
}

// ---------------------------------------------------------------------------
// Pure profiles and strong equilibria

inline constexpr int kMaxExhaustiveRelayers = 12;

namespace detail {

inline ActionProfile profile_from_mask(int n, std::uint32_t mask,
                                       std::optional<std::size_t> first) {
  ActionProfile p;
  p.actions.resize(static_cast<std::size_t>(n), Action::NoUpload);
  for (int i = 0; i < n; ++i)
    if (mask >> i & 1u) p.actions[i] = Action::Upload;
  p.first_uploader = first;
  return p;
}

inline std::uint32_t mask_from_profile(const ActionProfile& p) {
  std::uint32_t mask = 0;
  for (std::size_t i = 0; i < p.actions.size(); ++i)
    if (p.actions[i] == Action::Upload) mask |= 1u << i;
  return mask;
}

// Payoff of player i after a deviation to `mask`. The original first
// uploader keeps the slot while still uploading; otherwise the slot goes to
// a uniformly chosen new uploader and the expectation is taken.
inline double deviated_payoff(const GameParams& g, std::uint32_t mask,
                              std::optional<std::size_t> first, int i) {
  const int m = std::popcount(mask);
  if (m == 0) return -g.penalty;
  if (!(mask >> i & 1u)) return g.reward;
  if (first && (mask >> *first & 1u))
    return static_cast<std::size_t>(i) == *first ? g.reward - g.first_cost
                                                 : g.reward - g.late_cost;
  return (g.reward - g.first_cost) / m +
         (m - 1.0) / m * (g.reward - g.late_cost);
}

}  // namespace detail

struct Deviation {
  std::vector<std::size_t> coalition;  // players who switch action
  std::vector<Action> actions;         // resulting action vector
  std::vector<double> gains;           // per coalition member, all > 0
};

/// Searches every coalition for a joint switch that strictly improves all of
/// its members. Returns nothing when the profile is a strong equilibrium.
/// With `unilateral_only`, only single-player switches are tried, which is
/// the pure Nash check.
inline std::optional<Deviation> find_profitable_deviation(
    const GameParams& g, const ActionProfile& profile,
    bool unilateral_only = false) {
  validate(g);
  if (g.relayers > 20)
    throw std::invalid_argument("coalition enumeration limited to N <= 20");
  const auto base = realized_payoffs(g, profile);
  const std::uint32_t mask = detail::mask_from_profile(profile);
  const std::uint32_t all = (1u << g.relayers) - 1u;

  auto try_switch = [&](std::uint32_t sw) -> std::optional<Deviation> {
    const std::uint32_t dev = mask ^ sw;
    for (int i = 0; i < g.relayers; ++i) {
      if (!(sw >> i & 1u)) continue;
      const double d =
          detail::deviated_payoff(g, dev, profile.first_uploader, i) -
          base.values[i];
      if (!(d > 0.0)) return std::nullopt;
    }
    Deviation out;
    out.actions = detail::profile_from_mask(g.relayers, dev, std::nullopt).actions;
    for (int i = 0; i < g.relayers; ++i) {
      if (!(sw >> i & 1u)) continue;
      out.coalition.push_back(static_cast<std::size_t>(i));
      out.gains.push_back(
          detail::deviated_payoff(g, dev, profile.first_uploader, i) -
          base.values[i]);
    }
    return out;
  };

  if (unilateral_only) {
    for (int i = 0; i < g.relayers; ++i)
      if (auto d = try_switch(1u << i)) return d;
    return std::nullopt;
  }
  for (std::uint32_t sw = 1; sw <= all; ++sw)
    if (auto d = try_switch(sw)) return d;
  return std::nullopt;
}

struct StrongEquilibriumReport {
  /// The N profiles in which exactly one relayer uploads.
  std::vector<ActionProfile> profiles;
  double welfare = 0.0;  // N b - c_f, attained by each of them
  bool exhaustive = false;
  std::size_t profiles_checked = 0;
  std::vector<ActionProfile> strong_found;
  std::vector<ActionProfile> nash_found;
  double max_welfare = 0.0;
  bool verified = false;
};

/// Structural description of the single-uploader set, verified by brute
/// force over every pure profile (and first-uploader designation) when
/// N <= 12.
inline StrongEquilibriumReport strong_equilibria(const GameParams& g) {
  validate(g);
  StrongEquilibriumReport rep;
  const int n = g.relayers;
  for (int i = 0; i < n; ++i)
    rep.profiles.push_back(detail::profile_from_mask(
        n, 1u << i, static_cast<std::size_t>(i)));
  rep.welfare = n * g.reward - g.first_cost;
  if (n > kMaxExhaustiveRelayers) return rep;

  rep.exhaustive = true;
  rep.max_welfare = -n * g.penalty;
  const std::uint32_t all = (1u << n) - 1u;
  for (std::uint32_t mask = 0; mask <= all; ++mask) {
    std::vector<std::optional<std::size_t>> firsts;
    if (mask == 0) firsts.push_back(std::nullopt);
    for (int i = 0; i < n; ++i)
      if (mask >> i & 1u) firsts.push_back(static_cast<std::size_t>(i));
    for (const auto& f : firsts) {
      const auto profile = detail::profile_from_mask(n, mask, f);
      ++rep.profiles_checked;
      rep.max_welfare = std::max(rep.max_welfare, welfare(g, profile));
      if (!find_profitable_deviation(g, profile, true))
        rep.nash_found.push_back(profile);
      if (!find_profitable_deviation(g, profile))
        rep.strong_found.push_back(profile);
    }
  }

  auto same_set = [&](const std::vector<ActionProfile>& found) {
    if (found.size() != rep.profiles.size()) return false;
    for (const auto& p : found) {
      if (p.uploaders() != 1) return false;
      if (std::abs(welfare(g, p) - rep.welfare) > 1e-9) return false;
    }
    return true;
  };
  rep.verified = same_set(rep.strong_found) && same_set(rep.nash_found) &&
                 std::abs(rep.max_welfare - rep.welfare) <= 1e-9;
  return rep;
}

}  // namespace relayer
