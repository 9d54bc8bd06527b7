#include <gtest/gtest.h>

#include <algorithm>

#include "sisnet/benchmark.hpp"

using namespace sisnet;

namespace {

BenchmarkConfig small_config() {
  BenchmarkConfig c;
  c.n_series = 4;
  c.series_length = 24;
  c.n_agents = 10;
  c.training_length = 60;
  c.seed = 17;
  c.true_params.alpha = 0.08;
  return c;
}

GibbsConfig short_chain() {
  GibbsConfig g;
  g.n_iterations = 120;
  g.n_burn_in = 20;
  return g;
}

}  // namespace

TEST(Corruption, ZeroAndFullFlip) {
  ObservationMatrix y(3, 4, 1);
  y.set(0, 0, 0, Report::present);
  y.set(1, 2, 0, Report::absent);
  Rng rng = make_rng(1);
  EXPECT_EQ(corrupt_observations(y, 0.0, rng), y);
  const ObservationMatrix flipped = corrupt_observations(y, 1.0, rng);
  EXPECT_EQ(flipped.at(0, 0, 0), Report::absent);
  EXPECT_EQ(flipped.at(1, 2, 0), Report::present);
  EXPECT_EQ(flipped.at(2, 3, 0), Report::missing);

  const DynamicNetwork net(3, 2, {{{0, 1}}, {}});
  EXPECT_EQ(corrupt_network(net, 0.0, rng), net);
  const DynamicNetwork inverted = corrupt_network(net, 1.0, rng);
  EXPECT_FALSE(inverted.has_edge(0, 0, 1));
  EXPECT_TRUE(inverted.has_edge(0, 1, 2));
  EXPECT_EQ(inverted.num_edges(), 2u + 3u);
}

TEST(Corruption, FlipRate) {
  ObservationMatrix y(50, 200, 1);
  for (Step t = 0; t < 200; ++t)
    for (Agent n = 0; n < 50; ++n) y.set(n, t, 0, Report::absent);
  Rng rng = make_rng(8);
  const ObservationMatrix out = corrupt_observations(y, 0.05, rng);
  int flips = 0;
  for (Step t = 0; t < 200; ++t)
    for (Agent n = 0; n < 50; ++n) flips += out.at(n, t, 0) == Report::present;
  EXPECT_NEAR(flips / 10000.0, 0.05, 0.007);
}

TEST(BenchmarkConfig, HoldoutRounding) {
  BenchmarkConfig c;
  c.n_agents = 40;
  EXPECT_EQ(holdout_count(c), 4);
  c.n_agents = 4;
  EXPECT_THROW(holdout_count(c), std::invalid_argument);
  c.holdout_fraction = 1.0;
  EXPECT_THROW(holdout_count(c), std::invalid_argument);
  c = BenchmarkConfig{};
  c.observation_noise = 1.5;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = BenchmarkConfig{};
  c.jobs = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(Benchmark, HeldOutRecordsAreScored) {
  const BenchmarkConfig c = small_config();
  const auto base = train_baseline(c);
  const SeriesResult s = run_series(c, short_chain(), base, 0);
  ASSERT_EQ(s.held_out.size(), 1u);
  EXPECT_EQ(s.model_scores.size(), 24u);
  EXPECT_EQ(s.baseline_scores.size(), 24u);
  EXPECT_EQ(s.truth.size(), 24u);
  for (double v : s.model_scores) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Benchmark, IdenticalForAnyJobCount) {
  BenchmarkConfig c = small_config();
  const BenchmarkResult one = run_benchmark(c, short_chain());
  c.jobs = 3;
  const BenchmarkResult three = run_benchmark(c, short_chain());
  ASSERT_EQ(one.series.size(), three.series.size());
  for (std::size_t i = 0; i < one.series.size(); ++i) {
    EXPECT_EQ(one.series[i].held_out, three.series[i].held_out);
    EXPECT_EQ(one.series[i].model_scores, three.series[i].model_scores);
    EXPECT_EQ(one.series[i].baseline_scores, three.series[i].baseline_scores);
  }
  EXPECT_EQ(one.model_average.points.size(), three.model_average.points.size());
  EXPECT_EQ(one.model_average.auc, three.model_average.auc);
  c.seed = 18;
  EXPECT_NE(run_benchmark(c, short_chain()).series[0].model_scores, one.series[0].model_scores);
}

TEST(Benchmark, NoInfectionPossible) {
  BenchmarkConfig c;
  c.n_series = 2;
  c.series_length = 30;
  c.n_agents = 20;
  c.pattern = {1, 0.0, 0.0};
  c.observation_noise = 0.0;
  c.network_noise = 0.0;
  c.training_length = 30;
  c.true_params.alpha = 0.0;
  GibbsConfig g;
  g.n_iterations = 600;
  g.n_burn_in = 100;
  // Emissions known: a symptom-free record then rules out infection.
  g.initial_params = c.true_params;
  g.update_emissions = false;
  const LinearBaseline base = train_baseline(c);
  for (int i = 0; i < c.n_series; ++i) {
    const SeriesResult s = run_series(c, g, base, i);
    EXPECT_TRUE(std::all_of(s.truth.begin(), s.truth.end(), [](auto v) { return v == 0; }));
    EXPECT_FALSE(s.model_roc.has_value());
    for (double v : s.model_scores) EXPECT_LT(v, 0.05);
  }
  EXPECT_THROW(run_benchmark(c, g), std::invalid_argument);
}
