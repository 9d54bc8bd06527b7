#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sisnet/model.hpp"
#include "sisnet/network.hpp"
#include "sisnet/rng.hpp"

namespace sisnet {

/// Raised when a state configuration has zero probability under the current
/// parameters, e.g. an infection with every channel rate at zero.
class InconsistentStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log P(X, Y | params): initial-state factor, every t -> t+1 transition and
/// every non-missing symptom. Returns -infinity for impossible configurations.
double log_joint(const StateMatrix& x, const ObservationMatrix& y, const DynamicNetwork& network,
                 const ModelParams& params);

/// Log weights of X_{n,t} = 0 and X_{n,t} = 1 under the full conditional.
Eigen::Vector2d site_log_weights(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                                 const DynamicNetwork& network, const ModelParams& params);

/// P(X_{n,t} = 1 | everything else).
double site_conditional(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                        const DynamicNetwork& network, const ModelParams& params);

/// Draws X_{n,t} from its full conditional. Does not modify x.
int sample_state_site(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                      const DynamicNetwork& network, const ModelParams& params, Rng& rng);

struct EventCounts {
  long n_recoveries = 0;
  long n_persist_infectious = 0;
  long n_external_infections = 0;
  long n_external_failures = 0;
  long n_contact_infections = 0;
  long n_contact_failures = 0;

  EventCounts& operator+=(const EventCounts& o);
  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

/// Outcome of the k + 1 infection trials behind one observed infection.
struct InfectionCause {
  bool external = false;
  int contact_successes = 0;
  /// Contact trials that were drawn and failed.
  int contact_failures = 0;
  /// External channel drawn and failed (false when not part of the outcome).
  bool external_failed = false;
};

/// Samples the channels behind one 0 -> 1 transition with k infectious
/// contacts. Independent trials: the full trial vector conditioned on at
/// least one success. Additive: a single cause with weights (alpha, beta, ...,
/// beta); only the chosen channel is recorded.
InfectionCause sample_infection_cause(int k, const ModelParams& params, Rng& rng);

EventCounts attribute_infection_events(const StateMatrix& x, const DynamicNetwork& network,
                                       const ModelParams& params, Rng& rng);

/// Present/absent tallies per (symptom, state) over non-missing reports.
struct EmissionCounts {
  Eigen::Matrix<long, Eigen::Dynamic, 2> present;
  Eigen::Matrix<long, Eigen::Dynamic, 2> absent;
};

EmissionCounts count_emissions(const StateMatrix& x, const ObservationMatrix& y);

/// Conjugate Beta posterior after `successes` and `failures` Bernoulli trials.
inline BetaPrior beta_posterior(const BetaPrior& prior, long successes, long failures) {
  return {prior.a + static_cast<double>(successes), prior.b + static_cast<double>(failures)};
}

struct ParameterPosteriors {
  BetaPrior alpha;
  BetaPrior beta;
  BetaPrior gamma;
  std::vector<std::array<BetaPrior, 2>> emission;
};

ParameterPosteriors parameter_posteriors(const EventCounts& counts, const Priors& priors,
                                         const EmissionCounts& emission_counts);

/// Draws alpha, beta, gamma and emissions from their conjugate posteriors.
/// Variant and initial-state probability are carried over from `current`.
ModelParams update_parameters(const EventCounts& counts, const Priors& priors,
                              const EmissionCounts& emission_counts, const ModelParams& current,
                              Rng& rng);

/// Draws every parameter from its prior.
ModelParams sample_from_priors(const Priors& priors, TransitionVariant variant,
                               double initial_infected, Rng& rng);

enum class ScanOrder { systematic, random };

/// Starting states for the sampler.
enum class StateInit {
  any_symptom,   ///< X = 1 wherever a survey reports a symptom
  symptom_runs,  ///< as any_symptom, but single-step reports start susceptible
};

struct GibbsConfig {
  int n_iterations = 10000;
  int n_burn_in = 1000;
  std::uint64_t seed = 0;
  int thinning = 1;
  TransitionVariant variant = TransitionVariant::independent_trials;
  ScanOrder scan = ScanOrder::systematic;
  StateInit init = StateInit::symptom_runs;
  double initial_infected = 0.0;
  /// Starting parameters; drawn from the priors when absent.
  std::optional<ModelParams> initial_params;
  bool update_transitions = true;
  bool update_emissions = true;

  int kept_samples() const { return (n_iterations - n_burn_in) / thinning; }
};

void validate(const GibbsConfig& config);

struct ParamSample {
  double alpha;
  double beta;
  double gamma;
  EmissionMatrix emissions;
};

struct PosteriorSummary {
  Eigen::MatrixXd marginals;  ///< N x T posterior P(X_{n,t} = 1)
  std::vector<ParamSample> trace;
  int n_iterations = 0;
  int n_burn_in = 0;
  int thinning = 1;

  int kept_samples() const { return static_cast<int>(trace.size()); }
};

/// Pools independent chains: marginals weighted by kept samples, traces in order.
PosteriorSummary merge(const std::vector<PosteriorSummary>& chains);

struct TraceStats {
  double mean;
  double sd;
};

TraceStats trace_stats(const std::vector<ParamSample>& trace, double ParamSample::*field);

/// X = 1 wherever a survey reports at least one symptom. With
/// StateInit::symptom_runs a report is kept only when the previous or next
/// step of the same agent also reports a symptom.
StateMatrix initial_states_from_symptoms(const ObservationMatrix& y,
                                         StateInit policy = StateInit::any_symptom);

PosteriorSummary run_gibbs(const ObservationMatrix& y, const DynamicNetwork& network,
                           const Priors& priors, const GibbsConfig& config);

/// X_{n,t} = 1 iff marginal >= threshold.
StateMatrix impute_states(const PosteriorSummary& summary, double threshold);

}  // namespace sisnet
