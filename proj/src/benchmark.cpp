#include "sisnet/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace sisnet {

namespace {

enum Purpose : std::uint64_t {
  kNetwork = 1,
  kSimulation,
  kHoldout,
  kNoise,
  kGibbs,
  kTrainNetwork,
  kTrainSimulation,
  kTrainNoise,
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t series, Purpose purpose) {
  return make_rng(seed, series * 16 + purpose)();
}

}  // namespace

ModelParams default_benchmark_params() {
  ModelParams p;
  p.alpha = 0.01;
  p.beta = 0.045;
  p.gamma = 0.25;
  p.emissions = EmissionMatrix(1, 2);
  p.emissions << 0.0, 1.0;
  return p;
}

void validate(const BenchmarkConfig& config) {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (config.n_series < 1) throw std::invalid_argument("need at least one series");
  if (config.series_length < 2) throw std::invalid_argument("series must span two steps");
  if (config.n_agents < 2) throw std::invalid_argument("need at least two agents");
  if (config.training_length < 2) throw std::invalid_argument("training series too short");
  if (!unit(config.holdout_fraction) || !unit(config.observation_noise) ||
      !unit(config.network_noise) || !unit(config.report_rate))
    throw std::invalid_argument("fractions and noise levels must lie in [0, 1]");
  if (config.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  validate(config.true_params);
  holdout_count(config);
}

int holdout_count(const BenchmarkConfig& config) {
  const int count = static_cast<int>(std::lround(config.holdout_fraction * config.n_agents));
  if (count < 1) throw std::invalid_argument("holdout fraction rounds to zero agents");
  if (count >= config.n_agents) throw std::invalid_argument("holdout leaves no observed agents");
  return count;
}

ObservationMatrix corrupt_observations(const ObservationMatrix& y, double flip, Rng& rng) {
  ObservationMatrix out = y;
  for (Step t = 0; t < y.num_steps(); ++t)
    for (Agent n = 0; n < y.num_agents(); ++n)
      for (int s = 0; s < y.num_symptoms(); ++s) {
        const Report r = y.at(n, t, s);
        if (r == Report::missing || !bernoulli(rng, flip)) continue;
        out.set(n, t, s, r == Report::present ? Report::absent : Report::present);
      }
  return out;
}

DynamicNetwork corrupt_network(const DynamicNetwork& network, double flip, Rng& rng) {
  std::vector<std::vector<Contact>> edges(network.num_steps());
  for (Step t = 0; t < network.num_steps(); ++t)
    for (Agent a = 0; a < network.num_agents(); ++a)
      for (Agent b = a + 1; b < network.num_agents(); ++b)
        if (network.has_edge(t, a, b) != bernoulli(rng, flip)) edges[t].push_back({a, b});
  return DynamicNetwork(network.num_agents(), network.num_steps(), std::move(edges));
}

ContactFeatures observed_contact_features(const DynamicNetwork& network,
                                          const ObservationMatrix& y, Agent n, Step t) {
  return contact_features(network, n, t,
                          [&](Agent m, Step s) { return y.present_count(m, s) >= 1; });
}

LinearBaseline train_baseline(const BenchmarkConfig& config) {
  const DynamicNetwork truth_net =
      synthesize_proximity_network(config.n_agents, config.training_length, config.pattern,
                                   derive_seed(config.seed, 0, kTrainNetwork));
  SimulationConfig sim;
  sim.seed = derive_seed(config.seed, 0, kTrainSimulation);
  sim.report_rate = config.report_rate;
  const SimulationResult truth = simulate(truth_net, config.true_params, sim);

  Rng noise = make_rng(derive_seed(config.seed, 0, kTrainNoise));
  const ObservationMatrix y = corrupt_observations(truth.observations, config.observation_noise, noise);
  const DynamicNetwork net = corrupt_network(truth_net, config.network_noise, noise);

  std::vector<ContactFeatures> features;
  std::vector<std::uint8_t> labels;
  features.reserve(std::size_t(config.n_agents) * config.training_length);
  for (Step t = 0; t < net.num_steps(); ++t)
    for (Agent n = 0; n < net.num_agents(); ++n) {
      features.push_back(observed_contact_features(net, y, n, t));
      labels.push_back(truth.states(n, t));
    }
  return LinearBaseline::train(features, labels, ClassWeights::balanced(labels));
}

SeriesResult run_series(const BenchmarkConfig& config, const GibbsConfig& gibbs,
                        const LinearBaseline& baseline, int index) {
  const auto series = static_cast<std::uint64_t>(index) + 1;
  const DynamicNetwork truth_net =
      synthesize_proximity_network(config.n_agents, config.series_length, config.pattern,
                                   derive_seed(config.seed, series, kNetwork));
  SimulationConfig sim;
  sim.seed = derive_seed(config.seed, series, kSimulation);
  sim.report_rate = config.report_rate;
  const SimulationResult truth = simulate(truth_net, config.true_params, sim);

  SeriesResult result;
  result.index = index;
  {
    Rng pick = make_rng(derive_seed(config.seed, series, kHoldout));
    std::vector<Agent> agents(config.n_agents);
    std::iota(agents.begin(), agents.end(), 0);
    const int count = holdout_count(config);
    for (int i = 0; i < count; ++i)
      std::swap(agents[i], agents[uniform_int(pick, i, config.n_agents - 1)]);
    result.held_out.assign(agents.begin(), agents.begin() + count);
    std::sort(result.held_out.begin(), result.held_out.end());
  }

  Rng noise = make_rng(derive_seed(config.seed, series, kNoise));
  ObservationMatrix y = corrupt_observations(truth.observations, config.observation_noise, noise);
  for (Agent n : result.held_out)
    for (Step t = 0; t < y.num_steps(); ++t) y.set_missing(n, t);
  const DynamicNetwork net = corrupt_network(truth_net, config.network_noise, noise);

  GibbsConfig chain = gibbs;
  chain.seed = derive_seed(config.seed, series, kGibbs);
  const Priors priors = config.priors ? *config.priors : Priors::uniform(y.num_symptoms());
  const PosteriorSummary posterior = run_gibbs(y, net, priors, chain);

  for (Agent n : result.held_out)
    for (Step t = 0; t < y.num_steps(); ++t) {
      result.model_scores.push_back(posterior.marginals(n, t));
      result.baseline_scores.push_back(baseline.score(observed_contact_features(net, y, n, t)));
      result.truth.push_back(truth.states(n, t));
    }

  const auto positives = std::count(result.truth.begin(), result.truth.end(), 1);
  if (positives > 0 && positives < static_cast<long>(result.truth.size())) {
    result.model_roc = roc_curve(result.model_scores, result.truth);
    result.baseline_roc = roc_curve(result.baseline_scores, result.truth);
  }
  return result;
}

BenchmarkResult run_benchmark(const BenchmarkConfig& config, const GibbsConfig& gibbs) {
  validate(config);
  validate(gibbs);

  BenchmarkResult out;
  out.baseline = train_baseline(config);
  out.series.resize(config.n_series);

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < config.n_series; i = next++) {
      try {
        out.series[i] = run_series(config, gibbs, out.baseline, i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min(config.jobs, config.n_series);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < threads; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<RocCurve> model, base;
  for (const auto& s : out.series) {
    if (!s.model_roc) continue;
    model.push_back(*s.model_roc);
    base.push_back(*s.baseline_roc);
  }
  out.scored_series = static_cast<int>(model.size());
  if (model.empty())
    throw std::invalid_argument("ROC truth is single-class in every series; nothing to score");
  out.model_average = average_curves(model);
  out.baseline_average = average_curves(base);
  return out;
}

}  // namespace sisnet
