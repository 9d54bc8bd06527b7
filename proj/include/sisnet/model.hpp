#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sisnet/network.hpp"

namespace sisnet {

/// N x T matrix of latent states, 0 = susceptible, 1 = infectious.
using StateMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// S x 2 matrix, column x holds P(symptom s present | state x).
using EmissionMatrix = Eigen::Matrix<double, Eigen::Dynamic, 2>;

enum class Report : std::int8_t { absent = 0, present = 1, missing = 2 };

/// Per-agent, per-step, per-symptom survey outcomes.
class ObservationMatrix {
 public:
  /// Starts with every entry missing.
  ObservationMatrix(int num_agents, int num_steps, int num_symptoms);

  int num_agents() const { return num_agents_; }
  int num_steps() const { return num_steps_; }
  int num_symptoms() const { return num_symptoms_; }

  Report at(Agent n, Step t, int s) const { return values_[offset(n, t) + symptom(s)]; }
  void set(Agent n, Step t, int s, Report r) { values_[offset(n, t) + symptom(s)] = r; }

  /// Symptom vector of one survey; may contain missing entries.
  std::span<const Report> survey(Agent n, Step t) const {
    return std::span<const Report>(values_).subspan(offset(n, t),
                                                    static_cast<std::size_t>(num_symptoms_));
  }
  void set_survey(Agent n, Step t, std::span<const Report> reports);
  void set_missing(Agent n, Step t);

  /// True when any symptom slot of (n, t) is non-missing.
  bool surveyed(Agent n, Step t) const;
  int present_count(Agent n, Step t) const;

  friend bool operator==(const ObservationMatrix& lhs, const ObservationMatrix& rhs) {
    return lhs.num_agents_ == rhs.num_agents_ && lhs.num_steps_ == rhs.num_steps_ &&
           lhs.num_symptoms_ == rhs.num_symptoms_ && lhs.values_ == rhs.values_;
  }

 private:
  std::size_t offset(Agent n, Step t) const;
  std::size_t symptom(int s) const;

  int num_agents_;
  int num_steps_;
  int num_symptoms_;
  // (t, n, s) with s fastest, so one survey is contiguous.
  std::vector<Report> values_;
};

/// How infection channels combine for a susceptible agent.
enum class TransitionVariant {
  independent_trials,  ///< 1 - (1 - alpha)(1 - beta)^k
  additive,            ///< min(1, alpha + beta k)
};

std::string_view to_string(TransitionVariant v);
TransitionVariant parse_variant(std::string_view name);

struct ModelParams {
  double alpha = 0.01;  ///< external infection per step
  double beta = 0.045;  ///< infection per infectious contact per step
  double gamma = 0.25;  ///< recovery per step
  EmissionMatrix emissions = EmissionMatrix::Constant(1, 2, 0.5);
  TransitionVariant variant = TransitionVariant::independent_trials;
  /// P(X_{n,0} = 1). Zero means everybody starts susceptible.
  double initial_infected = 0.0;

  int num_symptoms() const { return static_cast<int>(emissions.rows()); }
};

/// Throws std::invalid_argument unless every probability lies in [0, 1].
void validate(const ModelParams& params);

struct BetaPrior {
  double a = 1.0;
  double b = 1.0;

  double mean() const { return a / (a + b); }
  double variance() const { return a * b / ((a + b) * (a + b) * (a + b + 1.0)); }
  friend bool operator==(const BetaPrior&, const BetaPrior&) = default;
};

struct Priors {
  BetaPrior alpha;
  BetaPrior beta;
  BetaPrior gamma;
  /// emission[s][x]
  std::vector<std::array<BetaPrior, 2>> emission;

  /// Beta(1, 1) everywhere.
  static Priors uniform(int num_symptoms);
  /// Prior means alpha 0.01, beta 0.04, gamma 0.25; emissions lean toward
  /// rare symptoms when susceptible.
  static Priors informative(int num_symptoms);
};

void validate(const Priors& priors);

// ---------------------------------------------------------------------------
// Transition kernel

template <typename Scalar>
Scalar infection_probability(int k, Scalar alpha, Scalar beta, TransitionVariant variant) {
  using std::pow;
  if (variant == TransitionVariant::additive) {
    const Scalar p = alpha + beta * static_cast<Scalar>(k);
    return p < Scalar(1) ? p : Scalar(1);
  }
  return Scalar(1) - (Scalar(1) - alpha) * pow(Scalar(1) - beta, k);
}

inline double infection_probability(int k, const ModelParams& params) {
  return infection_probability<double>(k, params.alpha, params.beta, params.variant);
}

inline double recovery_probability(const ModelParams& params) { return params.gamma; }

/// log P(X_{n,t+1} = to | X_{n,t} = from, k infectious contacts at t).
template <typename Scalar>
Scalar log_transition(int from, int to, int k, Scalar alpha, Scalar beta, Scalar gamma,
                      TransitionVariant variant) {
  using std::log;
  using std::log1p;
  if (from == 1) return to == 0 ? log(gamma) : log1p(-gamma);
  if (variant == TransitionVariant::independent_trials) {
    const Scalar log_escape = log1p(-alpha) + static_cast<Scalar>(k) * log1p(-beta);
    if (to == 0) return log_escape;
    // log(1 - exp(log_escape)), accurate for small infection rates
    return log_escape < Scalar(-0.693)
               ? log1p(-std::exp(log_escape))
               : log(-std::expm1(log_escape));
  }
  const Scalar p = infection_probability<Scalar>(k, alpha, beta, variant);
  return to == 1 ? log(p) : log1p(-p);
}

inline double log_transition(int from, int to, int k, const ModelParams& params) {
  return log_transition<double>(from, to, k, params.alpha, params.beta, params.gamma,
                                params.variant);
}

inline double log_initial(int x, const ModelParams& params) {
  return x == 1 ? std::log(params.initial_infected) : std::log1p(-params.initial_infected);
}

// ---------------------------------------------------------------------------
// Emission

/// log of the product of per-symptom Bernoulli factors; missing slots add 0.
double log_emission_probability(std::span<const Report> y, int x, const ModelParams& params);

inline double emission_probability(std::span<const Report> y, int x, const ModelParams& params) {
  return std::exp(log_emission_probability(y, x, params));
}

/// Number of infectious neighbors of n at step t.
int infectious_contacts(const DynamicNetwork& network, const StateMatrix& x, Agent n, Step t);

void check_dimensions(const DynamicNetwork& network, const StateMatrix& x);
void check_dimensions(const DynamicNetwork& network, const ObservationMatrix& y);

}  // namespace sisnet
