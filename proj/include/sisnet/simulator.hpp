#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sisnet/model.hpp"
#include "sisnet/network.hpp"

namespace sisnet {

struct SimulationConfig {
  std::uint64_t seed = 0;
  /// Explicit X_{.,0}; when empty everybody starts susceptible.
  std::optional<Eigen::VectorX<std::uint8_t>> initial_state;
  /// Probability that an agent submits a survey at a given step.
  double report_rate = 1.0;
};

struct SimulationResult {
  StateMatrix states;
  ObservationMatrix observations;
};

/// Forward sample of states and surveys. Deterministic given config.seed.
///
/// Recovery and infection at t+1 are evaluated against the states at t
/// (synchronous update). Every step, including the first, is surveyed with
/// probability report_rate and each symptom of a survey is drawn from the
/// emission column of the agent's state at that step.
SimulationResult simulate(const DynamicNetwork& network, const ModelParams& params,
                          const SimulationConfig& config);

/// Block-structured daily contact generator.
struct NetworkPattern {
  int num_groups = 4;
  double within_group = 0.3;
  double cross_group = 0.01;
};

/// Group of each agent under `pattern`: contiguous blocks of near-equal size.
std::vector<int> group_assignment(int num_agents, int num_groups);

DynamicNetwork synthesize_proximity_network(int num_agents, int num_steps,
                                            const NetworkPattern& pattern, std::uint64_t seed);

/// Lengths of maximal runs of ones in a 0/1 sequence. Runs touching the last
/// element are skipped when `drop_censored` is set.
template <typename Sequence>
std::vector<int> run_lengths(const Sequence& seq, bool drop_censored = false) {
  std::vector<int> runs;
  int current = 0;
  const auto size = static_cast<long>(seq.size());
  for (long i = 0; i < size; ++i) {
    if (seq[i]) {
      ++current;
    } else if (current > 0) {
      runs.push_back(current);
      current = 0;
    }
  }
  if (current > 0 && !drop_censored) runs.push_back(current);
  return runs;
}

}  // namespace sisnet
