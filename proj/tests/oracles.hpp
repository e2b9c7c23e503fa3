// Independent reference computations used only by the tests. Nothing here
// calls into the closed forms it is used to check.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "relayer/game.hpp"

namespace relayer::oracle {

inline double choose(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// E[1/(M+1)], M ~ Binomial(N-1, q), by direct summation.
inline double first_selection_sum(int n, double q) {
  double s = 0.0;
  for (int m = 0; m <= n - 1; ++m)
    s += choose(n - 1, m) * std::pow(q, m) * std::pow(1.0 - q, n - 1 - m) / (m + 1.0);
  return s;
}

/// Number of strict sign changes of f sampled on [a, b] with the given step.
inline int count_sign_changes(const std::function<double(double)>& f, double a, double b,
                              double step) {
  int changes = 0;
  const auto cells = static_cast<long>(std::ceil((b - a) / step));
  int prev = 0;
  for (long i = 0; i <= cells; ++i) {
    const double x = std::min(b, a + static_cast<double>(i) * step);
    const double v = f(x);
    const int s = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++changes;
    prev = s;
  }
  return changes;
}

/// Location of the first sign change of f on a dense grid (midpoint of the
/// cell where it happens), or NaN.
inline double first_sign_change(const std::function<double(double)>& f, double a, double b,
                                double step) {
  const auto cells = static_cast<long>(std::ceil((b - a) / step));
  double prev_x = a;
  double prev = f(a);
  for (long i = 1; i <= cells; ++i) {
    const double x = std::min(b, a + static_cast<double>(i) * step);
    const double v = f(x);
    if ((prev > 0.0 && v <= 0.0) || (prev < 0.0 && v >= 0.0)) return 0.5 * (prev_x + x);
    prev_x = x;
    prev = v;
  }
  return std::nan("");
}

/// Per-player expected utility by enumerating every Bernoulli outcome and
/// applying the payoff cases directly (uniform accepted upload).
inline std::vector<double> bernoulli_enumeration(const GameParams& g,
                                                 const std::vector<double>& q) {
  const int n = g.relayers;
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double prob = 1.0;
    int uploaders = 0;
    for (int j = 0; j < n; ++j) {
      const bool up = mask >> j & 1u;
      prob *= up ? q[j] : 1.0 - q[j];
      uploaders += up;
    }
    for (int j = 0; j < n; ++j) {
      double v;
      if (uploaders == 0)
        v = -g.penalty;
      else if (!(mask >> j & 1u))
        v = g.reward;
      else
        v = g.reward - (g.first_cost + (uploaders - 1) * g.late_cost) / uploaders;
      u[j] += prob * v;
    }
  }
  return u;
}

/// Random valid parameters with b = 100.
inline GameParams random_params(std::mt19937_64& rng, int n_min = 3, int n_max = 40) {
  std::uniform_int_distribution<int> n(n_min, n_max);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GameParams g;
  g.relayers = n(rng);
  g.reward = 100.0;
  g.first_cost = 5.0 + 90.0 * u(rng);
  g.late_cost = g.first_cost * (0.01 + 0.98 * u(rng));
  g.penalty = 10.0 * std::pow(100.0, u(rng));  // 10 .. 1000
  return g;
}

}  // namespace relayer::oracle
