#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sisnet/evaluation.hpp"
#include "sisnet/inference.hpp"
#include "sisnet/model.hpp"
#include "sisnet/simulator.hpp"

namespace sisnet {

/// Ground-truth parameters for the synthetic protocol: one symptom that
/// reports the latent state exactly, so observation_noise alone sets the
/// observation error.
ModelParams default_benchmark_params();

struct BenchmarkConfig {
  int n_series = 50;
  int series_length = 128;
  int n_agents = 40;
  NetworkPattern pattern{4, 0.6, 0.01};
  double holdout_fraction = 0.10;
  double observation_noise = 0.01;
  double network_noise = 0.001;
  double report_rate = 1.0;
  ModelParams true_params = default_benchmark_params();
  /// Length of the separately synthesized series the baseline is trained on.
  int training_length = 1000;
  std::optional<Priors> priors;  ///< uniform when absent
  std::uint64_t seed = 0;
  int jobs = 1;
};

void validate(const BenchmarkConfig& config);

/// Number of agents hidden per series; throws when it rounds to zero.
int holdout_count(const BenchmarkConfig& config);

struct SeriesResult {
  int index = 0;
  std::vector<Agent> held_out;
  std::vector<double> model_scores;
  std::vector<double> baseline_scores;
  std::vector<std::uint8_t> truth;
  /// Absent when the held-out truth contains a single class.
  std::optional<RocCurve> model_roc;
  std::optional<RocCurve> baseline_roc;
};

struct BenchmarkResult {
  std::vector<SeriesResult> series;
  RocCurve model_average;
  RocCurve baseline_average;
  int scored_series = 0;
  LinearBaseline baseline;
};

/// Independent flips of every non-missing symptom entry.
ObservationMatrix corrupt_observations(const ObservationMatrix& y, double flip, Rng& rng);

/// Independent per-step insert/delete of every agent pair.
DynamicNetwork corrupt_network(const DynamicNetwork& network, double flip, Rng& rng);

/// Baseline features of (n, t) with a contact counted as infectious when its
/// survey at that step reports a symptom.
ContactFeatures observed_contact_features(const DynamicNetwork& network,
                                          const ObservationMatrix& y, Agent n, Step t);

/// Fits the baseline on a fresh training series generated with the true parameters.
LinearBaseline train_baseline(const BenchmarkConfig& config);

SeriesResult run_series(const BenchmarkConfig& config, const GibbsConfig& gibbs,
                        const LinearBaseline& baseline, int index);

/// Hold-out imputation benchmark of the Gibbs sampler against the baseline.
/// Series are independent and may run on `config.jobs` threads; results are
/// identical for any job count.
BenchmarkResult run_benchmark(const BenchmarkConfig& config, const GibbsConfig& gibbs);

}  // namespace sisnet
