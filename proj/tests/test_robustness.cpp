#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relayer/robustness.hpp"

namespace relayer {
namespace {

const GameParams kFive{5, 100, 25, 1, 100};

GameParams coalition_game(int n, double p) { return {n, 100, 50, 25, p}; }

TEST(PayoffVsUploaders, Cases) {
  EXPECT_DOUBLE_EQ(payoff_vs_m_uploaders(kFive, Action::Upload, 0), 75.0);
  EXPECT_DOUBLE_EQ(payoff_vs_m_uploaders(kFive, Action::NoUpload, 0), -100.0);
  EXPECT_DOUBLE_EQ(payoff_vs_m_uploaders(kFive, Action::NoUpload, 3), 100.0);
  EXPECT_NEAR(payoff_vs_m_uploaders(kFive, Action::Upload, 4), 94.2, 1e-12);
  EXPECT_THROW(payoff_vs_m_uploaders(kFive, Action::Upload, 5), std::invalid_argument);
}

TEST(ExpectedPayoffs, NoMutantsReducesToClosedForms) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 100; ++t) {
    const auto g = oracle::random_params(rng, 3, 80);
    const double q = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    const auto p = expected_payoffs(g, {g.relayers, 0, 0.3, q});
    ASSERT_TRUE(p.resident);
    EXPECT_FALSE(p.mutant);
    const double mixed = q * v_upload(g, q) + (1 - q) * v_noupload(g, q);
    EXPECT_NEAR(*p.resident, mixed, 1e-9 * (1 + std::abs(mixed))) << describe(g);
  }
}

TEST(ExpectedPayoffs, AllAbstainingMutantsMeanOutage) {
  const auto p = expected_payoffs(kFive, {5, 5, 0.0, 0.4});
  EXPECT_FALSE(p.resident);
  EXPECT_DOUBLE_EQ(*p.mutant, -100.0);
}

TEST(ExpectedPayoffs, FrozenSixPlayerValues) {
  const GameParams g{6, 100, 25, 1, 100};
  const auto p = expected_payoffs(g, {6, 2, 0.1, 0.4});
  EXPECT_NEAR(*p.resident, 73.768832, 1e-6);
  EXPECT_NEAR(*p.mutant, 77.836448, 1e-6);
}

TEST(ExpectedPayoffs, MatchBernoulliEnumeration) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 60; ++t) {
    const auto g = oracle::random_params(rng, 3, 8);
    const int n = g.relayers;
    const int k = std::uniform_int_distribution<int>(0, n)(rng);
    const double qm = u(rng), qr = u(rng);
    std::vector<double> q(static_cast<std::size_t>(n), qr);
    for (int j = 0; j < k; ++j) q[static_cast<std::size_t>(j)] = qm;
    const auto ref = oracle::bernoulli_enumeration(g, q);
    const auto p = expected_payoffs(g, {n, k, qm, qr});
    if (k >= 1) {
      EXPECT_NEAR(*p.mutant, ref[0], 1e-10) << describe(g) << " k=" << k;
    }
    if (k <= n - 1) {
      EXPECT_NEAR(*p.resident, ref.back(), 1e-10) << describe(g) << " k=" << k;
    }
  }
}

TEST(ExpectedPayoffs, RejectsBadSplit) {
  EXPECT_THROW(expected_payoffs(kFive, {5, 6, 0.1, 0.1}), std::invalid_argument);
  EXPECT_THROW(expected_payoffs(kFive, {6, 1, 0.1, 0.1}), std::invalid_argument);
  EXPECT_THROW(expected_payoffs(kFive, {5, 1, 1.1, 0.1}), std::domain_error);
}

TEST(PayoffGap, VanishesAtTheEquilibrium) {
  const auto g = coalition_game(10, 100);
  const double q_star = solve_equilibrium(g).q_star;
  for (int k = 1; k <= 9; ++k) EXPECT_NEAR(payoff_gap(g, q_star, q_star, k), 0.0, 1e-9);
  EXPECT_THROW(payoff_gap(g, q_star, 0.2, 0.15), std::invalid_argument);
  EXPECT_DOUBLE_EQ(payoff_gap(g, q_star, 0.2, 0.3), payoff_gap(g, q_star, 0.2, 3));
}

// A lone mutant's payoff does not depend on its own q when the others play
// q_star (indifference), while the residents gain from a more eager mutant
// and lose from a lazier one. So the gap is negative below q_star.
TEST(PayoffGap, SignOnEitherSideForSingleMutant) {
  for (const auto& g : {coalition_game(10, 100), GameParams{5, 100, 25, 1, 100}}) {
    const double q_star = solve_equilibrium(g).q_star;
    const auto lone = [&](double qm) {
      return *expected_payoffs(g, {g.relayers, 1, qm, q_star}).mutant;
    };
    EXPECT_NEAR(lone(0.0), lone(1.0), 1e-9);
    for (double qm = 0.0; qm <= 1.0; qm += 0.05) {
      const double d = payoff_gap(g, q_star, qm, 1);
      if (qm < q_star - 1e-3) {
        EXPECT_LT(d, 0.0) << describe(g) << " q_m=" << qm;
      }
      if (qm > q_star + 1e-3) {
        EXPECT_GT(d, 0.0) << describe(g) << " q_m=" << qm;
      }
    }
  }
  EXPECT_NEAR(payoff_gap(coalition_game(10, 100),
                         solve_equilibrium(coalition_game(10, 100)).q_star, 0.0, 1),
              -6.505430834213236, 1e-9);
}

TEST(InvasionBarrier, AbstainingMutantsDefeatTheBarrier) {
  const auto g = coalition_game(10, 100);
  const double q_star = solve_equilibrium(g).q_star;
  const auto rep = invasion_barrier(g, q_star);
  ASSERT_EQ(rep.per_k.size(), 9u);
  EXPECT_EQ(rep.barrier, 0.0);
  EXPECT_EQ(rep.mutants, 0);
  EXPECT_EQ(rep.lower_barrier, 0.0);
  EXPECT_GT(rep.upper_barrier, 0.0);
  EXPECT_EQ(rep.per_k[0].argmin_q_m, 0.0);
  EXPECT_NEAR(rep.per_k[0].min_gap, -6.505430834213236, 1e-9);
  for (const auto& m : rep.per_k_upper) EXPECT_GT(m.argmin_q_m, q_star);
  for (const auto& m : rep.per_k_lower) EXPECT_LT(m.argmin_q_m, q_star);
  EXPECT_THROW(invasion_barrier(g, q_star, 0.01), std::invalid_argument);
}

TEST(InvasionBarrier, DownClosure) {
  std::vector<GapMinimum> per_k{{1, 0.5, 0}, {2, 0.1, 0}, {3, -0.1, 0}, {4, 2.0, 0}};
  int k = -1;
  EXPECT_DOUBLE_EQ(detail::down_closed_barrier(per_k, 10, &k), 0.2);
  EXPECT_EQ(k, 2);
  per_k[0].min_gap = 0.0;
  EXPECT_DOUBLE_EQ(detail::down_closed_barrier(per_k, 10), 0.0);
}

TEST(Coalition, FrozenValuesAndBaseline) {
  const auto g = coalition_game(10, 100);
  const auto eq = solve_equilibrium(g);
  const auto row = coalition_point(g, eq.q_star, 6);
  EXPECT_NEAR(row.resident, -2.4924, 5e-4);
  EXPECT_NEAR(row.mutant, 5.0375, 5e-4);
  EXPECT_DOUBLE_EQ(row.alpha, 0.6);
  for (const auto& r : coalition_scan(g, eq.q_star)) {
    EXPECT_NEAR(r.baseline, eq.reward, 1e-9);
    EXPECT_GE(r.mutant, r.resident);
  }
  EXPECT_EQ(coalition_abstention(g, eq.q_star, 0.26).mutants, 3);
  EXPECT_THROW(coalition_abstention(g, eq.q_star, 0.0), std::invalid_argument);
  EXPECT_THROW(coalition_abstention(g, eq.q_star, 0.01), std::invalid_argument);
}

TEST(Coalition, PayoffsFallAsTheCoalitionGrows) {
  for (int n : {10, 30})
    for (double p : {100.0, 500.0}) {
      const auto g = coalition_game(n, p);
      const auto rows = coalition_scan(g, solve_equilibrium(g).q_star);
      for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_LT(rows[i].resident, rows[i - 1].resident);
        EXPECT_LT(rows[i].mutant, rows[i - 1].mutant);
      }
    }
}

TEST(Coalition, StakeLossThresholds) {
  auto threshold = [](int n, double p) {
    const auto g = coalition_game(n, p);
    return stake_loss_threshold(g, solve_equilibrium(g).q_star);
  };
  EXPECT_DOUBLE_EQ(threshold(10, 100).value(), 0.6);
  EXPECT_DOUBLE_EQ(threshold(10, 500).value(), 0.5);
  EXPECT_NEAR(threshold(30, 500).value(), 0.4, 1e-12);
  for (int n : {10, 30})
    EXPECT_LE(threshold(n, 500).value(), threshold(n, 100).value());
}

TEST(Coalition, InterpolatedCrossings) {
  const auto g = coalition_game(10, 100);
  const auto rows = coalition_scan(g, solve_equilibrium(g).q_star);
  const auto res = payoff_zero_crossing(rows, Group::Resident);
  const auto mut = payoff_zero_crossing(rows, Group::Mutant);
  ASSERT_TRUE(res);
  ASSERT_TRUE(mut);
  EXPECT_GT(*res, 0.5);
  EXPECT_LT(*res, 0.6);
  EXPECT_GE(*mut, *res);

  std::vector<CoalitionPoint> toy{{0.1, 1, 4, 4, 0}, {0.2, 2, -4, 1, 0}, {0.3, 3, -8, -1, 0}};
  EXPECT_NEAR(*payoff_zero_crossing(toy, Group::Resident), 0.15, 1e-15);
  EXPECT_NEAR(*payoff_zero_crossing(toy, Group::Mutant), 0.25, 1e-15);
  toy[0].resident = -1;
  EXPECT_DOUBLE_EQ(*payoff_zero_crossing(toy, Group::Resident), 0.1);
  EXPECT_FALSE(payoff_zero_crossing({}, Group::Resident));
}

}  // namespace
}  // namespace relayer
