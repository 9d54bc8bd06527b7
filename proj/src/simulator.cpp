#include "sisnet/simulator.hpp"

#include <stdexcept>
#include <string>

#include "sisnet/rng.hpp"

namespace sisnet {

SimulationResult simulate(const DynamicNetwork& network, const ModelParams& params,
                          const SimulationConfig& config) {
  validate(params);
  if (!(config.report_rate >= 0.0 && config.report_rate <= 1.0))
    throw std::invalid_argument("report_rate must lie in [0, 1]");

  const int n_agents = network.num_agents();
  const int n_steps = network.num_steps();
  const int n_symptoms = params.num_symptoms();

  StateMatrix x = StateMatrix::Zero(n_agents, n_steps);
  if (config.initial_state) {
    const auto& init = *config.initial_state;
    if (init.size() != n_agents)
      throw std::invalid_argument("initial state has " + std::to_string(init.size()) +
                                  " entries, network has " + std::to_string(n_agents) +
                                  " agents");
    for (int n = 0; n < n_agents; ++n) {
      if (init(n) > 1) throw std::invalid_argument("initial state entries must be 0 or 1");
      x(n, 0) = init(n);
    }
  }

  Rng rng = make_rng(config.seed);
  ObservationMatrix y(n_agents, n_steps, n_symptoms);
  std::vector<Report> survey(n_symptoms);

  auto emit = [&](Step t) {
    for (Agent n = 0; n < n_agents; ++n) {
      if (!bernoulli(rng, config.report_rate)) continue;
      for (int s = 0; s < n_symptoms; ++s)
        survey[s] = bernoulli(rng, params.emissions(s, x(n, t))) ? Report::present
                                                                 : Report::absent;
      y.set_survey(n, t, survey);
    }
  };

  emit(0);
  for (Step t = 0; t + 1 < n_steps; ++t) {
    for (Agent n = 0; n < n_agents; ++n) {
      if (x(n, t) == 1) {
        x(n, t + 1) = bernoulli(rng, recovery_probability(params)) ? 0 : 1;
      } else {
        const int k = infectious_contacts(network, x, n, t);
        x(n, t + 1) = bernoulli(rng, infection_probability(k, params)) ? 1 : 0;
      }
    }
    emit(t + 1);
  }
  return {std::move(x), std::move(y)};
}

std::vector<int> group_assignment(int num_agents, int num_groups) {
  if (num_groups < 1 || num_groups > num_agents)
    throw std::invalid_argument("group count must lie in [1, agents]");
  std::vector<int> group(num_agents);
  for (int n = 0; n < num_agents; ++n)
    group[n] = static_cast<int>(static_cast<long>(n) * num_groups / num_agents);
  return group;
}

DynamicNetwork synthesize_proximity_network(int num_agents, int num_steps,
                                            const NetworkPattern& pattern, std::uint64_t seed) {
  if (num_agents < 2) throw std::invalid_argument("need at least two agents");
  if (num_steps < 1) throw std::invalid_argument("need at least one step");
  auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(pattern.within_group) || !in_unit(pattern.cross_group))
    throw std::invalid_argument("contact probabilities must lie in [0, 1]");
  const auto group = group_assignment(num_agents, pattern.num_groups);

  Rng rng = make_rng(seed, 0x6e6574);
  std::vector<std::vector<Contact>> edges(num_steps);
  for (Step t = 0; t < num_steps; ++t) {
    for (Agent a = 0; a < num_agents; ++a) {
      for (Agent b = a + 1; b < num_agents; ++b) {
        const double p = group[a] == group[b] ? pattern.within_group : pattern.cross_group;
        if (bernoulli(rng, p)) edges[t].push_back({a, b});
      }
    }
  }
  return DynamicNetwork(num_agents, num_steps, std::move(edges));
}

}  // namespace sisnet
