#include <gtest/gtest.h>

#include <sstream>

#include "relayer/io.hpp"
#include "relayer/sweep.hpp"

namespace relayer {
namespace {

TEST(FormatNumber, TwelveSignificantDigits) {
  EXPECT_EQ(format_number(0.5287004195801749), "0.52870041958");
  EXPECT_EQ(format_number(100.0), "100");
  EXPECT_EQ(format_number(1e-15), "1e-15");
  EXPECT_EQ(format_number(-2.5), "-2.5");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(ParseValues, RangesAndLists) {
  EXPECT_EQ(parse_values("3:6:1"), (std::vector<double>{3, 4, 5, 6}));
  EXPECT_EQ(parse_values("600:1000:100").size(), 5u);
  EXPECT_EQ(parse_values("0.1:0.3:0.1").size(), 3u);
  EXPECT_EQ(parse_values("5,10,30"), (std::vector<double>{5, 10, 30}));
  EXPECT_THROW(parse_values("1:2"), InvalidParams);
  EXPECT_THROW(parse_values("3:1:1"), InvalidParams);
  EXPECT_THROW(parse_values("a,b"), InvalidParams);
  EXPECT_THROW(parse_values("1:5:0"), InvalidParams);
}

TEST(ParseAxis, Names) {
  EXPECT_EQ(parse_axis("N"), SweepAxis::Relayers);
  EXPECT_EQ(parse_axis("c_f"), SweepAxis::FirstCost);
  EXPECT_EQ(parse_axis("cl"), SweepAxis::LateCost);
  EXPECT_EQ(parse_axis("p"), SweepAxis::Penalty);
  EXPECT_THROW(parse_axis("b"), InvalidParams);
}

TEST(Sweep, RowsKeepInputOrderAcrossThreads) {
  SweepSpec spec;
  spec.base = {5, 100, 25, 1, 100};
  spec.axis = SweepAxis::Relayers;
  spec.values = parse_values("3:50:1");
  const auto one = run_sweep(spec, {}, 1);
  const auto many = run_sweep(spec, {}, 4);
  ASSERT_EQ(one.size(), 48u);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].axis_value, spec.values[i]);
    EXPECT_EQ(many[i].axis_value, spec.values[i]);
    ASSERT_TRUE(one[i].report);
    EXPECT_EQ(one[i].report->q_star, many[i].report->q_star);
    EXPECT_EQ(one[i].report->q_star,
              solve_equilibrium(sweep_point(spec, spec.values[i])).q_star);
  }
  std::ostringstream a, b;
  write_sweep_csv(a, spec, {}, one);
  write_sweep_csv(b, spec, {}, many);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Sweep, InvalidPointsCarryAnError) {
  SweepSpec spec;
  spec.base = {5, 100, 25, 1, 100};
  spec.axis = SweepAxis::LateCost;
  spec.values = {1, 30, 2.5};
  const auto rows = run_sweep(spec);
  EXPECT_TRUE(rows[0].report);
  EXPECT_FALSE(rows[1].report);
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_TRUE(rows[2].report);

  spec.axis = SweepAxis::Relayers;
  spec.values = {4.5};
  EXPECT_FALSE(run_sweep(spec)[0].report);

  spec.outputs = {"welfare"};
  EXPECT_THROW(run_sweep(spec), InvalidParams);
}

TEST(Sweep, CsvLayout) {
  SweepSpec spec;
  spec.base = {5, 100, 25, 1, 100};
  spec.axis = SweepAxis::Penalty;
  spec.values = {100, 0};
  spec.outputs = {"outage", "q_star"};
  std::ostringstream os;
  write_sweep_csv(os, spec, {}, run_sweep(spec));
  std::istringstream in(os.str());
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GE(lines.size(), 8u);
  EXPECT_EQ(lines[0], "# artifact: relayer-game 0.1.0");
  EXPECT_EQ(lines[1], "# command: sweep");
  EXPECT_EQ(lines[4], "# axis: p");
  EXPECT_EQ(lines[5], "axis_value,outage,q_star,residual,error");
  EXPECT_EQ(lines[6].substr(0, 4), "100,");
  EXPECT_EQ(lines[7].substr(0, 5), "0,,,,");
  EXPECT_EQ(lines[7].find(',', 5), std::string::npos);
}

TEST(Sweep, ThirtyRelayerOutageCrossesFivePercentNearFiveHundred) {
  SweepSpec spec;
  spec.base = {30, 100, 50, 25, 100};
  spec.axis = SweepAxis::Penalty;
  spec.values = parse_values("400:600:1");
  const auto rows = run_sweep(spec);
  double crossing = 0.0;
  for (const auto& r : rows)
    if (r.report->outage < 0.05) {
      crossing = r.axis_value;
      break;
    }
  EXPECT_GT(crossing, 500.0);
  EXPECT_LT(crossing, 510.0);
}

TEST(Json, ReportKeys) {
  const GameParams g{5, 100, 25, 1, 100};
  const auto rep = solve_equilibrium(g);
  const auto j = to_json(rep);
  for (const char* k : {"q_star", "outage", "reward", "residual_h", "iterations", "bracket"})
    EXPECT_TRUE(j.contains(k)) << k;
  const auto meta = provenance_json("solve", g, {});
  EXPECT_EQ(meta["artifact"], "relayer-game");
  EXPECT_EQ(meta["params"]["N"], 5);
  EXPECT_EQ(meta.begin().key(), "artifact");
}

}  // namespace
}  // namespace relayer
