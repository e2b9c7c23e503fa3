// Relayer upload game: parameters, realized payoffs and the closed-form
// expected payoffs of a symmetric mixed population.
//
// Every relayer either uploads (U) or abstains (NU). If several upload, one
// of them is chosen uniformly as the first (accepted) upload and pays c_f;
// the others are reverted and pay c_l. Everyone receives b when at least one
// upload happens, and everyone pays p when nobody uploads.

#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace relayer {

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Public parameters of one game instance, in abstract utility units.
struct GameParams {
  int relayers = 0;         // N
  double reward = 0.0;      // b
  double first_cost = 0.0;  // c_f, paid by the accepted uploader
  double late_cost = 0.0;   // c_l, paid by every reverted uploader
  double penalty = 0.0;     // p, paid by everyone on outage
};

inline std::string describe(const GameParams& g) {
  std::ostringstream os;
  os << "N=" << g.relayers << " b=" << g.reward << " c_f=" << g.first_cost
     << " c_l=" << g.late_cost << " p=" << g.penalty;
  return os.str();
}

/// Throws InvalidParams unless N >= 3, 0 < c_l < c_f < b and p > 0.
inline void validate(const GameParams& g) {
  auto fail = [&](const std::string& why) {
    throw InvalidParams(why + " (" + describe(g) + ")");
  };
  if (g.relayers < 3) fail("number of relayers must satisfy N >= 3");
  if (!std::isfinite(g.reward) || !std::isfinite(g.first_cost) ||
      !std::isfinite(g.late_cost) || !std::isfinite(g.penalty))
    fail("parameters must be finite");
  if (!(g.late_cost > 0.0)) fail("late cost must satisfy c_l > 0");
  if (!(g.late_cost < g.first_cost)) fail("costs must satisfy c_l < c_f");
  if (!(g.first_cost < g.reward)) fail("reward must satisfy b > c_f");
  if (!(g.penalty > 0.0)) fail("penalty must satisfy p > 0");
}

inline GameParams make_params(int n, double b, double c_f, double c_l,
                              double p) {
  GameParams g{n, b, c_f, c_l, p};
  validate(g);
  return g;
}

namespace detail {
inline void require_probability(double q, const char* what) {
  if (!(q >= 0.0 && q <= 1.0))
    throw std::domain_error(std::string(what) + " must lie in [0, 1]");
}
}  // namespace detail

enum class Action { Upload, NoUpload };

inline const char* to_string(Action a) {
  return a == Action::Upload ? "U" : "NU";
}

struct ActionProfile {
  std::vector<Action> actions;
  std::optional<std::size_t> first_uploader;

  std::size_t uploaders() const {
    std::size_t m = 0;
    for (Action a : actions) m += a == Action::Upload;
    return m;
  }
};

/// Checks that first_uploader is present iff someone uploads and that it
/// points at an uploader.
inline void validate(const ActionProfile& profile) {
  const bool any = profile.uploaders() > 0;
  if (any != profile.first_uploader.has_value())
    throw std::invalid_argument(
        "first uploader must be present iff at least one player uploads");
  if (profile.first_uploader) {
    const std::size_t f = *profile.first_uploader;
    if (f >= profile.actions.size() ||
        profile.actions[f] != Action::Upload)
      throw std::invalid_argument("first uploader must be a player who uploads");
  }
}

struct PayoffVector {
  std::vector<double> values;
};

inline PayoffVector realized_payoffs(const GameParams& g,
                                     const ActionProfile& profile) {
  if (profile.actions.size() != static_cast<std::size_t>(g.relayers))
    throw std::invalid_argument("action profile length differs from N");
  validate(profile);

  PayoffVector out;
  out.values.resize(profile.actions.size());
  if (!profile.first_uploader) {
    for (double& v : out.values) v = -g.penalty;
    return out;
  }
  for (std::size_t i = 0; i < profile.actions.size(); ++i) {
    if (profile.actions[i] == Action::NoUpload)
      out.values[i] = g.reward;
    else if (i == *profile.first_uploader)
      out.values[i] = g.reward - g.first_cost;
    else
      out.values[i] = g.reward - g.late_cost;
  }
  return out;
}

/// Sum of realized payoffs over all players.
inline double welfare(const GameParams& g, const ActionProfile& profile) {
  double w = 0.0;
  for (double v : realized_payoffs(g, profile).values) w += v;
  return w;
}

/// Probability that an uploader is selected first when each of the other
/// N-1 players uploads independently with probability q:
///   E[1/(M+1)], M ~ Binomial(N-1, q)  =  (1 - (1-q)^N) / (N q).
/// Equals 1 at q = 0 by continuity.
inline double first_selection_prob(int n, double q) {
  detail::require_probability(q, "upload probability");
  if (q == 0.0) return 1.0;
  // -expm1(N log1p(-q)) == 1 - (1-q)^N without cancellation for small q.
  const double reached = -std::expm1(n * std::log1p(-q));
  return reached / (n * q);
}

/// Expected utility of uploading when every other player uploads with q.
inline double v_upload(const GameParams& g, double q) {
  const double qf = first_selection_prob(g.relayers, q);
  return qf * (g.reward - g.first_cost) + (1.0 - qf) * (g.reward - g.late_cost);
}

/// Expected utility of abstaining when every other player uploads with q.
inline double v_noupload(const GameParams& g, double q) {
  detail::require_probability(q, "upload probability");
  const double none = std::pow(1.0 - q, g.relayers - 1);
  return g.reward * (1.0 - none) - g.penalty * none;
}

/// Expected gain from uploading over abstaining.
inline double gain(const GameParams& g, double q) {
  return v_upload(g, q) - v_noupload(g, q);
}

/// Polynomial form of the equilibrium condition, h(q) = N q gain(q):
///   h(q) = N q (b+p)(1-q)^(N-1) - N q c_l + (c_l - c_f)(1 - (1-q)^N).
/// h(0) = 0 is a spurious root; the equilibrium is its unique root in (0,1).
inline double h_poly(const GameParams& g, double q) {
  detail::require_probability(q, "upload probability");
  const int n = g.relayers;
  const double bp = g.reward + g.penalty;
  const double s = 1.0 - q;
  return n * q * bp * std::pow(s, n - 1) - n * q * g.late_cost +
         (g.late_cost - g.first_cost) * (1.0 - std::pow(s, n));
}

inline double h_prime(const GameParams& g, double q) {
  detail::require_probability(q, "upload probability");
  const int n = g.relayers;
  const double bp = g.reward + g.penalty;
  const double s = 1.0 - q;
  return n * bp * (std::pow(s, n - 1) - q * (n - 1) * std::pow(s, n - 2)) -
         n * g.late_cost + n * (g.late_cost - g.first_cost) * std::pow(s, n - 1);
}

inline double h_second(const GameParams& g, double q) {
  detail::require_probability(q, "upload probability");
  const int n = g.relayers;
  const double bp = g.reward + g.penalty;
  const double s = 1.0 - q;
  const double bracket = n * q - 2.0 - (g.late_cost - g.first_cost) / bp * s;
  return n * (n - 1.0) * bp * std::pow(s, n - 3) * bracket;
}

/// Root of h'' in (0,1): h is concave below it and convex above it.
inline double inflection_point(const GameParams& g) {
  const double bp = g.reward + g.penalty;
  const double dc = g.late_cost - g.first_cost;
  return (2.0 * bp + dc) / (g.relayers * bp + dc);
}

}  // namespace relayer
