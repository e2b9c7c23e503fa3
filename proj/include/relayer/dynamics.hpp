// Symmetric replicator dynamic  dq/dt = mu q (1-q) gain(q).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "relayer/game.hpp"

namespace relayer {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;
  double mu = 0.0;
  double q0 = 0.0;
  double dt = 0.0;
};

struct IntegratorConfig {
  double t_end = 500.0;
  double dt = 0.01;
  std::size_t max_points = 10'000;
  double overshoot_tolerance = 1e-12;
};

inline double replicator_rhs(const GameParams& g, double mu, double q) {
  if (!(mu > 0.0)) throw std::domain_error("adaptation rate must be > 0");
  detail::require_probability(q, "population upload probability");
  return mu * q * (1.0 - q) * gain(g, q);
}

/// Fixed-step RK4. Stored samples are decimated to at most max_points; the
/// initial and final states are always kept.
inline Trajectory integrate(const GameParams& g, double mu, double q0,
                            const IntegratorConfig& cfg = {}) {
  validate(g);
  if (!(mu > 0.0)) throw std::domain_error("adaptation rate must be > 0");
  if (!(q0 > 0.0 && q0 < 1.0))
    throw std::domain_error("initial probability must lie in (0, 1)");
  if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0))
    throw std::domain_error("dt and t_end must be > 0");
  if (cfg.max_points < 2) throw std::domain_error("max_points must be >= 2");

  const auto steps = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
  const std::size_t stride =
      std::max<std::size_t>(1, (steps + cfg.max_points - 2) / (cfg.max_points - 1));

  // Stage evaluations may land marginally outside [0, 1]; the field is zero
  // on the boundary, so clamping them is exact there.
  auto f = [&](double q) { return replicator_rhs(g, mu, std::clamp(q, 0.0, 1.0)); };

  Trajectory tr;
  tr.mu = mu;
  tr.q0 = q0;
  tr.dt = cfg.dt;
  tr.times.reserve(steps / stride + 2);
  tr.values.reserve(steps / stride + 2);
  tr.times.push_back(0.0);
  tr.values.push_back(q0);

  double q = q0;
  const double h = cfg.dt;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double k1 = f(q);
    const double k2 = f(q + 0.5 * h * k1);
    const double k3 = f(q + 0.5 * h * k2);
    const double k4 = f(q + h * k3);
    double next = q + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (next < -cfg.overshoot_tolerance || next > 1.0 + cfg.overshoot_tolerance ||
        !std::isfinite(next))
      throw IntegrationError("replicator step left [0, 1] at t=" +
                             std::to_string(s * h) + "; dt is too large");
    q = std::clamp(next, 0.0, 1.0);
    if (s % stride == 0 || s == steps) {
      tr.times.push_back(static_cast<double>(s) * h);
      tr.values.push_back(q);
    }
  }
  return tr;
}

/// Earliest stored time after which the trajectory stays within `tol` of
/// `target`. Empty if it never settles.
inline std::optional<double> settling_time(const Trajectory& tr, double target,
                                           double tol) {
  std::optional<double> t;
  for (std::size_t i = 0; i < tr.values.size(); ++i) {
    if (std::abs(tr.values[i] - target) < tol) {
      if (!t) t = tr.times[i];
    } else {
      t.reset();
    }
  }
  return t;
}

}  // namespace relayer
