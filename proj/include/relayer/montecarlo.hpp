// Round-by-round simulation and brute-force expectation oracle for the
// relayer upload game.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "relayer/game.hpp"
#include "relayer/rng.hpp"

namespace relayer {

struct RoundOutcome {
  ActionProfile profile;
  PayoffVector payoffs;
  bool outage = false;
};

namespace detail {
inline void require_strategies(const GameParams& g, std::span<const double> s) {
  if (s.size() != static_cast<std::size_t>(g.relayers))
    throw std::invalid_argument("strategy vector length differs from N");
  for (double q : s) require_probability(q, "strategy upload probability");
}
}  // namespace detail

/// Round r draws player j's action from counter r*(N+1)+j and the first
/// uploader from counter r*(N+1)+N.
inline RoundOutcome play_round(const GameParams& g, std::span<const double> strategies,
                               const CounterRng& rng, std::uint64_t round) {
  const auto n = static_cast<std::size_t>(g.relayers);
  const std::uint64_t base = round * (n + 1);
  RoundOutcome out;
  out.profile.actions.resize(n);
  std::size_t uploaders = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool up = rng.uniform(base + j) < strategies[j];
    out.profile.actions[j] = up ? Action::Upload : Action::NoUpload;
    uploaders += up;
  }
  if (uploaders > 0) {
    auto pick = static_cast<std::size_t>(rng.uniform(base + n) * uploaders);
    pick = std::min(pick, uploaders - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (out.profile.actions[j] != Action::Upload) continue;
      if (pick-- == 0) {
        out.profile.first_uploader = j;
        break;
      }
    }
  }
  out.outage = uploaders == 0;
  out.payoffs = realized_payoffs(g, out.profile);
  return out;
}

struct SimulationStats {
  std::uint64_t rounds = 0;
  std::uint64_t seed = 0;
  std::vector<double> player_mean;
  std::vector<double> player_se;
  std::vector<std::size_t> group_of;  // group index of each player
  std::vector<double> group_mean;     // mean payoff per member per round
  std::vector<double> group_se;
  std::uint64_t outage_count = 0;
  double outage_rate = 0.0;
  double outage_se = 0.0;
  std::vector<std::uint64_t> first_uploader_histogram;
  std::uint64_t support_violations = 0;
};

inline constexpr std::uint64_t kSimulationChunk = 1u << 15;

namespace detail {

struct SimAccumulator {
  std::vector<std::uint64_t> kind_counts;  // per player: [b-c_f, b-c_l, b, -p]
  std::vector<double> group_sum;
  std::vector<double> group_sumsq;
  std::vector<std::uint64_t> histogram;
  std::uint64_t outages = 0;
  std::uint64_t violations = 0;

  SimAccumulator(std::size_t n, std::size_t groups)
      : kind_counts(4 * n, 0), group_sum(groups, 0.0), group_sumsq(groups, 0.0),
        histogram(n, 0) {}
};

}  // namespace detail

/// Simulates `rounds` independent upload windows. Each player uploads with
/// its own probability; the accepted upload is drawn uniformly among the
/// uploaders. `group_of` assigns players to groups for pooled means (all in
/// group 0 when empty). Results depend only on the inputs, never on the
/// number of worker threads.
inline SimulationStats simulate(const GameParams& g, std::span<const double> strategies,
                                std::uint64_t rounds, std::uint64_t seed,
                                std::vector<std::size_t> group_of = {},
                                unsigned threads = 0) {
  validate(g);
  detail::require_strategies(g, strategies);
  if (rounds < 1) throw std::invalid_argument("rounds must be >= 1");
  const auto n = static_cast<std::size_t>(g.relayers);
  if (group_of.empty()) group_of.assign(n, 0);
  if (group_of.size() != n) throw std::invalid_argument("group map length differs from N");
  const std::size_t groups = *std::max_element(group_of.begin(), group_of.end()) + 1;
  std::vector<double> group_size(groups, 0.0);
  for (auto gi : group_of) group_size[gi] += 1.0;
  for (double s : group_size)
    if (s == 0.0) throw std::invalid_argument("group indices must be contiguous");

  const double kinds[4] = {g.reward - g.first_cost, g.reward - g.late_cost, g.reward,
                           -g.penalty};
  const CounterRng rng(seed);
  const std::uint64_t chunks = (rounds + kSimulationChunk - 1) / kSimulationChunk;
  std::vector<detail::SimAccumulator> parts(chunks, detail::SimAccumulator(n, groups));

  auto run_chunk = [&](std::uint64_t c) {
    auto& acc = parts[c];
    std::vector<double> round_group(groups);
    const std::uint64_t end = std::min(rounds, (c + 1) * kSimulationChunk);
    for (std::uint64_t r = c * kSimulationChunk; r < end; ++r) {
      const auto out = play_round(g, strategies, rng, r);
      std::fill(round_group.begin(), round_group.end(), 0.0);
      if (out.outage)
        ++acc.outages;
      else
        ++acc.histogram[*out.profile.first_uploader];
      for (std::size_t j = 0; j < n; ++j) {
        const double v = out.payoffs.values[j];
        int kind = -1;
        for (int t = 0; t < 4; ++t)
          if (v == kinds[t]) kind = t;
        if (kind < 0) {
          ++acc.violations;
        } else {
          ++acc.kind_counts[4 * j + kind];
        }
        round_group[group_of[j]] += v;
      }
      for (std::size_t gi = 0; gi < groups; ++gi) {
        const double avg = round_group[gi] / group_size[gi];
        acc.group_sum[gi] += avg;
        acc.group_sumsq[gi] += avg * avg;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, chunks));
  if (threads <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::uint64_t c; (c = next.fetch_add(1)) < chunks;) run_chunk(c);
      });
  }

  // Merge in chunk order.
  detail::SimAccumulator total(n, groups);
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < total.kind_counts.size(); ++i)
      total.kind_counts[i] += p.kind_counts[i];
    for (std::size_t gi = 0; gi < groups; ++gi) {
      total.group_sum[gi] += p.group_sum[gi];
      total.group_sumsq[gi] += p.group_sumsq[gi];
    }
    for (std::size_t j = 0; j < n; ++j) total.histogram[j] += p.histogram[j];
    total.outages += p.outages;
    total.violations += p.violations;
  }

  const auto rn = static_cast<double>(rounds);
  auto se_from = [&](double sum, double sumsq) {
    if (rounds < 2) return 0.0;
    const double mean = sum / rn;
    const double var = std::max(0.0, (sumsq - rn * mean * mean) / (rn - 1.0));
    return std::sqrt(var / rn);
  };

  SimulationStats st;
  st.rounds = rounds;
  st.seed = seed;
  st.group_of = std::move(group_of);
  st.player_mean.resize(n);
  st.player_se.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < 4; ++t) {
      const auto c = static_cast<double>(total.kind_counts[4 * j + t]);
      sum += c * kinds[t];
      sumsq += c * kinds[t] * kinds[t];
    }
    st.player_mean[j] = sum / rn;
    st.player_se[j] = se_from(sum, sumsq);
  }
  st.group_mean.resize(groups);
  st.group_se.resize(groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    st.group_mean[gi] = total.group_sum[gi] / rn;
    st.group_se[gi] = se_from(total.group_sum[gi], total.group_sumsq[gi]);
  }
  st.outage_count = total.outages;
  st.outage_rate = static_cast<double>(total.outages) / rn;
  st.outage_se = rounds < 2 ? 0.0 : std::sqrt(st.outage_rate * (1.0 - st.outage_rate) / rn);
  st.first_uploader_histogram = std::move(total.histogram);
  st.support_violations = total.violations;
  return st;
}

inline constexpr std::uint64_t kMaxTraceRows = 100'000;

/// Per-round CSV trace of the first min(rounds, cap) rounds of a simulation
/// with the same seed.
inline void write_round_trace(std::ostream& os, const GameParams& g,
                              std::span<const double> strategies, std::uint64_t rounds,
                              std::uint64_t seed, std::uint64_t cap = kMaxTraceRows) {
  detail::require_strategies(g, strategies);
  const CounterRng rng(seed);
  os << "round,actions,first_uploader,outage,payoffs\n";
  const std::uint64_t rows = std::min({rounds, cap, kMaxTraceRows});
  for (std::uint64_t r = 0; r < rows; ++r) {
    const auto out = play_round(g, strategies, rng, r);
    os << r << ',';
    for (std::size_t j = 0; j < out.profile.actions.size(); ++j)
      os << (j ? " " : "") << to_string(out.profile.actions[j]);
    os << ',';
    if (out.profile.first_uploader) os << *out.profile.first_uploader;
    os << ',' << (out.outage ? 1 : 0) << ',';
    for (std::size_t j = 0; j < out.payoffs.values.size(); ++j)
      os << (j ? " " : "") << out.payoffs.values[j];
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// Exact enumeration

inline constexpr int kMaxEnumerationRelayers = 20;

struct ExactExpectation {
  std::vector<double> player_utility;
  double outage = 0.0;
};

/// Sums over all 2^N action profiles, weighting by the product of Bernoulli
/// probabilities and averaging realized payoffs over every possible first
/// uploader of the profile.
inline ExactExpectation enumerate_exact(const GameParams& g,
                                        std::span<const double> strategies) {
  validate(g);
  detail::require_strategies(g, strategies);
  if (g.relayers > kMaxEnumerationRelayers)
    throw std::invalid_argument("exact enumeration is limited to N <= 20");
  const auto n = static_cast<std::size_t>(g.relayers);
  ExactExpectation ex;
  ex.player_utility.assign(n, 0.0);

  ActionProfile profile;
  profile.actions.resize(n);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    double prob = 1.0;
    std::vector<std::size_t> up;
    for (std::size_t j = 0; j < n; ++j) {
      const bool u = mask >> j & 1u;
      profile.actions[j] = u ? Action::Upload : Action::NoUpload;
      prob *= u ? strategies[j] : 1.0 - strategies[j];
      if (u) up.push_back(j);
    }
    if (prob == 0.0) continue;
    if (up.empty()) {
      profile.first_uploader.reset();
      const auto pay = realized_payoffs(g, profile);
      for (std::size_t j = 0; j < n; ++j) ex.player_utility[j] += prob * pay.values[j];
      ex.outage += prob;
      continue;
    }
    const double share = prob / static_cast<double>(up.size());
    for (std::size_t f : up) {
      profile.first_uploader = f;
      const auto pay = realized_payoffs(g, profile);
      for (std::size_t j = 0; j < n; ++j) ex.player_utility[j] += share * pay.values[j];
    }
  }
  return ex;
}

// ---------------------------------------------------------------------------
// Anonymity of the accepted uploader

struct UniformityTest {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
  double significance = 0.01;
  bool passed = false;
};

/// Chi-square goodness of fit of the first-uploader histogram against the
/// uniform distribution over all relayers.
inline UniformityTest anonymity_uniformity(const SimulationStats& st,
                                           double significance = 0.01,
                                           std::uint64_t min_rounds = 100'000) {
  std::uint64_t total = 0;
  for (auto c : st.first_uploader_histogram) total += c;
  if (total < min_rounds)
    throw std::invalid_argument("uniformity test needs at least " +
                                std::to_string(min_rounds) + " non-outage rounds");
  const auto cells = static_cast<double>(st.first_uploader_histogram.size());
  const double expected = static_cast<double>(total) / cells;
  UniformityTest t;
  for (auto c : st.first_uploader_histogram) {
    const double d = static_cast<double>(c) - expected;
    t.statistic += d * d / expected;
  }
  t.degrees_of_freedom = static_cast<int>(cells) - 1;
  const boost::math::chi_squared_distribution<double> dist(t.degrees_of_freedom);
  t.p_value = boost::math::cdf(boost::math::complement(dist, t.statistic));
  t.significance = significance;
  t.passed = t.p_value >= significance;
  return t;
}

}  // namespace relayer
