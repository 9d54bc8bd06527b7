// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Criteria may be selected by number on the command
// line; the default runs all ten.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "sisnet/benchmark.hpp"
#include "sisnet/evaluation.hpp"
#include "sisnet/inference.hpp"
#include "sisnet/simulator.hpp"

using namespace sisnet;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kNormalizationTol = 1e-10;
constexpr double kNormalizationSeconds = 1.0;
constexpr double kPosteriorTol = 0.02;
constexpr int kPosteriorInstances = 6;
constexpr int kPosteriorKept = 50000;
constexpr double kRecoverySds = 3.0;
constexpr double kRecoveryCoverage = 0.95;
constexpr double kBenchmarkMargin = 0.02;
constexpr int kNoiseSeeds = 10;
constexpr int kNoiseInversions = 1;
constexpr double kRunMean = 4.0, kRunTol = 0.2;
constexpr int kRuns = 1000;
constexpr double kRejectTarget = 0.05, kRejectTol = 0.02;
constexpr int kNullTrials = 1000;
constexpr double kMannWhitneyTol = 1e-12;
constexpr double kExpMean = 2.0, kExpTol = 0.05, kKsLevel = 0.05, kExpPassRate = 0.90;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ModelParams make_params(double a, double b, double g, TransitionVariant v) {
  ModelParams p;
  p.alpha = a;
  p.beta = b;
  p.gamma = g;
  p.variant = v;
  return p;
}

// 1 ------------------------------------------------------------------------

Outcome normalization() {
  const auto start = std::chrono::steady_clock::now();
  const DynamicNetwork net(2, 3, {{{0, 1}}, {{0, 1}}, {}});
  const ObservationMatrix y(2, 3, 1);
  double worst = 0.0;
  for (auto v : {TransitionVariant::independent_trials, TransitionVariant::additive}) {
    ModelParams p = make_params(0.1, 0.3, 0.25, v);
    p.initial_infected = 0.2;
    double total = 0.0;
    oracle::for_each_state(2, 3, [&](const StateMatrix& x) { total += std::exp(log_joint(x, y, net, p)); });
    worst = std::max(worst, std::abs(total - 1.0));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst < kNormalizationTol && secs < kNormalizationSeconds,
          fmt("max |sum - 1| = %.3g, %.3f s", worst, secs)};
}

// 2 ------------------------------------------------------------------------

Outcome exact_posterior() {
  Rng rng = make_rng(2024);
  double worst = 0.0;
  for (int inst = 0; inst < kPosteriorInstances; ++inst) {
    const int n = 2 + inst % 2;
    const int t = 12 / n;
    std::vector<std::vector<Contact>> edges(t);
    for (auto& step : edges)
      for (Agent a = 0; a < n; ++a)
        for (Agent b = a + 1; b < n; ++b)
          if (bernoulli(rng, 0.5)) step.push_back({a, b});
    const DynamicNetwork net(n, t, edges);
    ObservationMatrix y(n, t, 1);
    for (Step s = 0; s < t; ++s)
      for (Agent a = 0; a < n; ++a)
        if (bernoulli(rng, 0.7)) y.set(a, s, 0, bernoulli(rng, 0.4) ? Report::present : Report::absent);

    const auto variant = inst % 3 == 2 ? TransitionVariant::additive : TransitionVariant::independent_trials;
    ModelParams p = make_params(0.05 + 0.2 * uniform(rng), 0.1 + 0.3 * uniform(rng),
                                0.15 + 0.4 * uniform(rng), variant);
    p.initial_infected = 0.3;
    p.emissions = EmissionMatrix(1, 2);
    p.emissions << 0.15, 0.75;

    GibbsConfig g;
    g.n_burn_in = 1000;
    g.n_iterations = g.n_burn_in + kPosteriorKept;
    g.seed = 100 + inst;
    g.variant = variant;
    g.initial_infected = p.initial_infected;
    g.initial_params = p;
    g.update_transitions = false;
    g.update_emissions = false;
    const PosteriorSummary post = run_gibbs(y, net, Priors::uniform(1), g);
    const Eigen::MatrixXd exact = oracle::posterior_marginals(y, net, p);
    worst = std::max(worst, (post.marginals - exact).cwiseAbs().maxCoeff());
  }
  return {worst < kPosteriorTol,
          fmt("%d instances, max |gibbs - exact| = %.4f", kPosteriorInstances, worst)};
}

// 3 ------------------------------------------------------------------------

Outcome parameter_recovery() {
  ModelParams truth = make_params(0.01, 0.045, 0.25, TransitionVariant::independent_trials);
  truth.emissions = EmissionMatrix(3, 2);
  truth.emissions << 0.01, 0.8,
                     0.02, 0.7,
                     0.01, 0.6;
  int covered = 0, cells = 0;
  std::string misses;
  for (int series = 0; series < 10; ++series) {
    const DynamicNetwork net = synthesize_proximity_network(20, 128, {4, 0.3, 0.01}, 500 + series);
    SimulationConfig sim;
    sim.seed = 600 + series;
    const SimulationResult data = simulate(net, truth, sim);
    GibbsConfig g;
    g.n_iterations = 4000;
    g.n_burn_in = 1000;
    g.seed = 700 + series;
    const PosteriorSummary post = run_gibbs(data.observations, net, Priors::uniform(3), g);
    const double truths[3] = {truth.alpha, truth.beta, truth.gamma};
    const char* names[3] = {"alpha", "beta", "gamma"};
    for (int k = 0; k < 3; ++k) {
      std::vector<double> v;
      for (const auto& s : post.trace) v.push_back(k == 0 ? s.alpha : k == 1 ? s.beta : s.gamma);
      const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double sd = std::sqrt(ss / (v.size() - 1));
      ++cells;
      if (std::abs(mean - truths[k]) <= kRecoverySds * sd) {
        ++covered;
      } else {
        misses += fmt(" [series %d %s mean %.4f sd %.4f]", series, names[k], mean, sd);
      }
    }
  }
  const double rate = static_cast<double>(covered) / cells;
  return {rate >= kRecoveryCoverage, fmt("%d/%d cells within 3 sd", covered, cells) + misses};
}

// 4 ------------------------------------------------------------------------

GibbsConfig benchmark_chain(int iterations, int burn_in) {
  GibbsConfig g;
  g.n_iterations = iterations;
  g.n_burn_in = burn_in;
  return g;
}

Outcome benchmark_superiority() {
  BenchmarkConfig c;
  c.n_series = 10;
  c.series_length = 64;
  c.seed = 4;
  const BenchmarkResult r = run_benchmark(c, benchmark_chain(10000, 1000));
  const double margin = r.model_average.auc - r.baseline_average.auc;
  return {margin >= kBenchmarkMargin,
          fmt("model %.4f, baseline %.4f, margin %.4f over %d scored series", r.model_average.auc,
              r.baseline_average.auc, margin, r.scored_series)};
}

// 5 ------------------------------------------------------------------------

Outcome noise_monotonicity() {
  int inversions = 0;
  std::string detail;
  for (int seed = 0; seed < kNoiseSeeds; ++seed) {
    double auc[3];
    const double levels[3] = {0.001, 0.05, 0.2};
    for (int i = 0; i < 3; ++i) {
      BenchmarkConfig c;
      c.n_series = 5;
      c.series_length = 128;
      c.observation_noise = levels[i];
      c.seed = 50 + seed;
      auc[i] = run_benchmark(c, benchmark_chain(2000, 500)).model_average.auc;
    }
    const bool ok = auc[0] > auc[1] && auc[0] > auc[2];
    inversions += !ok;
    detail += fmt(" %.3f/%.3f/%.3f%s", auc[0], auc[1], auc[2], ok ? "" : "*");
  }
  return {inversions <= kNoiseInversions, fmt("%d inversions; auc", inversions) + detail};
}

// 6 ------------------------------------------------------------------------

Outcome infectious_duration() {
  ModelParams p = make_params(0.01, 0.045, 0.25, TransitionVariant::independent_trials);
  p.emissions = EmissionMatrix(1, 2);
  p.emissions << 0.01, 0.8;
  std::vector<int> runs;
  for (std::uint64_t seed = 0; runs.size() < static_cast<std::size_t>(kRuns); ++seed) {
    const DynamicNetwork net = synthesize_proximity_network(20, 128, {4, 0.3, 0.01}, 9000 + seed);
    SimulationConfig sim;
    sim.seed = seed;
    const SimulationResult r = simulate(net, p, sim);
    for (Agent n = 0; n < 20; ++n) {
      const Eigen::VectorX<std::uint8_t> row = r.states.row(n);
      for (int len : run_lengths(row, true)) runs.push_back(len);
    }
  }
  runs.resize(kRuns);
  const double mean = std::accumulate(runs.begin(), runs.end(), 0.0) / kRuns;
  return {std::abs(mean - kRunMean) <= kRunTol, fmt("mean of %d runs = %.3f", kRuns, mean)};
}

// 7 ------------------------------------------------------------------------

std::vector<std::set<int>> random_days(int agents, int days, double rate, Rng& rng) {
  std::vector<std::set<int>> sets(agents);
  for (auto& s : sets)
    for (int d = 0; d < days; ++d)
      if (bernoulli(rng, rate)) s.insert(d);
  return sets;
}

Outcome permutation_calibration() {
  Rng rng = make_rng(77);
  int rejections = 0;
  for (int trial = 0; trial < kNullTrials; ++trial) {
    StaticGraph g{20, {}};
    for (Agent a = 0; a < 20; ++a)
      for (Agent b = a + 1; b < 20; ++b)
        if (bernoulli(rng, 0.15)) g.edges.push_back({a, b});
    const auto days = random_days(20, 60, 0.05 + 0.2 * uniform(rng), rng);
    rejections += permutation_test(g, days, 199, 10000 + trial).p_value <= kRejectTarget;
  }
  const double rate = static_cast<double>(rejections) / kNullTrials;

  // Two cliques of six; members of a clique report symptoms on the same days.
  StaticGraph cliques{12, {}};
  for (int c = 0; c < 2; ++c)
    for (Agent a = 0; a < 6; ++a)
      for (Agent b = a + 1; b < 6; ++b) cliques.edges.push_back({6 * c + a, 6 * c + b});
  std::vector<std::set<int>> days(12);
  const auto shared = random_days(2, 100, 0.2, rng);
  for (Agent a = 0; a < 12; ++a) days[a] = shared[a / 6];
  const double p = permutation_test(cliques, days, 999, 5).p_value;

  return {std::abs(rate - kRejectTarget) <= kRejectTol && p <= kRejectTarget,
          fmt("null rejection rate %.3f over %d trials, two-clique p = %.4f", rate, kNullTrials, p)};
}

// 8 ------------------------------------------------------------------------

Outcome roc_identity() {
  Rng rng = make_rng(8);
  double worst = 0.0;
  for (int set = 0; set < 100; ++set) {
    const int size = uniform_int(rng, 2, 300);
    const int levels = uniform_int(rng, 2, 40);
    std::vector<double> scores(size);
    std::vector<std::uint8_t> truth(size);
    for (int i = 0; i < size; ++i) {
      truth[i] = bernoulli(rng, 0.3);
      scores[i] = uniform_int(rng, 0, levels) / static_cast<double>(levels) + 0.2 * truth[i];
    }
    truth[0] = 1;
    truth[1] = 0;
    worst = std::max(worst, std::abs(roc_curve(scores, truth).auc - oracle::mann_whitney(scores, truth)));
  }
  return {worst <= kMannWhitneyTol, fmt("100 sets, max |auc - U/(PN)| = %.3g", worst)};
}

// 9 ------------------------------------------------------------------------

Outcome exponential_fit() {
  int good = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Rng rng = make_rng(9, rep);
    std::vector<double> runs(10000);
    for (auto& r : runs) r = -kExpMean * std::log1p(-uniform(rng));
    const ExponentialFit fit = fit_duration_exponential(runs);
    good += std::abs(fit.mean() - kExpMean) <= kExpTol && fit.ks_p_value > kKsLevel;
  }
  return {good >= kExpPassRate * 100, fmt("%d/100 repetitions recover the mean with KS p > 0.05", good)};
}

// 10 -----------------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) {
      std::ifstream in(e.path(), std::ios::binary);
      files[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
  return files;
}

Outcome reproducibility() {
  const fs::path work = fs::temp_directory_path() / "sisnet_acceptance_cli";
  fs::remove_all(work);
  fs::create_directories(work);
  auto run = [&](const std::string& args) {
    const std::string cmd = "cd '" + work.string() + "' && '" SISNET_CLI "' " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  std::ofstream(work / "friends.csv") << "agent_a,agent_b\n1,2\n2,3\n3,4\n5,6\n7,8\n8,9\n10,11\n";
  std::ofstream(work / "runs.csv") << "duration\n1\n2\n4\n3\n1\n2\n";

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate --agents 12 --steps 40 --alpha 0.04 --seed 10", "sim"},
      {"infer --contacts sim/contacts.csv --surveys sim/surveys.csv --seed 11 --iterations 1000 "
       "--burn-in 100",
       "inf"},
      {"benchmark --series 2 --length 32 --agents 20 --training-length 100 --iterations 300 "
       "--burn-in 50 --alpha 0.05 --seed 12 --jobs 2",
       "bench"},
      {"permtest --friends friends.csv --surveys sim/surveys.csv --permutations 199 --seed 13", "perm"},
      {"fit-durations --runs runs.csv", "dur"},
      {"export-heatmap --marginals inf/marginals.csv --contacts sim/contacts.csv --start-date 2009-01-01",
       "heat"},
  };
  std::string failed;
  for (const auto& [args, out] : commands) {
    const std::string full = args + " --out " + out;
    if (!run(full)) {
      failed += " " + out + "(exit)";
      continue;
    }
    const auto first = snapshot(work / out);
    fs::remove_all(work / out);
    if (!run(full) || snapshot(work / out) != first) failed += " " + out;
  }
  fs::remove_all(work);
  return {failed.empty(), failed.empty() ? "6 commands byte-identical on rerun" : "differs:" + failed};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"log_joint normalization", normalization},
      {"gibbs marginals vs enumeration", exact_posterior},
      {"parameter recovery", parameter_recovery},
      {"benchmark model over baseline", benchmark_superiority},
      {"auc falls with observation noise", noise_monotonicity},
      {"mean infectious run", infectious_duration},
      {"permutation test calibration", permutation_calibration},
      {"auc equals mann-whitney", roc_identity},
      {"exponential duration fit", exponential_fit},
      {"cli reruns byte-identical", reproducibility},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o{false, ""};
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
