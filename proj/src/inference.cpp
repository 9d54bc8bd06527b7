#include "sisnet/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sisnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Log-space tables for one parameter setting; rebuilt after every update.
class LogKernel {
 public:
  explicit LogKernel(const ModelParams& params, int max_contacts = 64) : params_(params) {
    log_recover_ = std::log(params.gamma);
    log_persist_ = std::log1p(-params.gamma);
    infect_.resize(max_contacts + 1);
    escape_.resize(max_contacts + 1);
    for (int k = 0; k <= max_contacts; ++k) {
      escape_[k] = log_transition(0, 0, k, params);
      infect_[k] = log_transition(0, 1, k, params);
    }
    log_present_ = params.emissions.array().log();
    log_absent_ = (-params.emissions.array()).log1p();
    initial_[0] = log_initial(0, params);
    initial_[1] = log_initial(1, params);
  }

  double transition(int from, int to, int k) const {
    if (from == 1) return to == 0 ? log_recover_ : log_persist_;
    if (k < static_cast<int>(infect_.size())) return to == 1 ? infect_[k] : escape_[k];
    return log_transition(0, to, k, params_);
  }

  double initial(int x) const { return initial_[x]; }

  double emission(std::span<const Report> y, int x) const {
    double total = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
      if (y[s] == Report::present)
        total += log_present_(static_cast<Eigen::Index>(s), x);
      else if (y[s] == Report::absent)
        total += log_absent_(static_cast<Eigen::Index>(s), x);
    }
    return total;
  }

 private:
  const ModelParams& params_;
  double log_recover_;
  double log_persist_;
  std::vector<double> infect_;
  std::vector<double> escape_;
  Eigen::Array<double, Eigen::Dynamic, 2> log_present_;
  Eigen::Array<double, Eigen::Dynamic, 2> log_absent_;
  double initial_[2];
};

Eigen::Vector2d site_weights(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                             const DynamicNetwork& network, const LogKernel& kernel) {
  const int last = network.num_steps() - 1;
  Eigen::Vector2d w;
  const auto survey = y.survey(n, t);
  for (int c = 0; c < 2; ++c) w(c) = kernel.emission(survey, c);

  if (t == 0) {
    w(0) += kernel.initial(0);
    w(1) += kernel.initial(1);
  } else {
    const int prev = x(n, t - 1);
    const int k = infectious_contacts(network, x, n, t - 1);
    w(0) += kernel.transition(prev, 0, k);
    w(1) += kernel.transition(prev, 1, k);
  }

  if (t < last) {
    const int next = x(n, t + 1);
    const int k = infectious_contacts(network, x, n, t);
    w(0) += kernel.transition(0, next, k);
    w(1) += kernel.transition(1, next, k);
    // n's state at t enters every susceptible neighbor's infection pressure.
    const int own = x(n, t);
    for (Agent m : network.neighbors(t, n)) {
      if (x(m, t) != 0) continue;
      const int others = infectious_contacts(network, x, m, t) - own;
      const int m_next = x(m, t + 1);
      w(0) += kernel.transition(0, m_next, others);
      w(1) += kernel.transition(0, m_next, others + 1);
    }
  }
  return w;
}

double probability_of_one(const Eigen::Vector2d& w, Agent n, Step t) {
  if (w(0) == kNegInf && w(1) == kNegInf)
    throw InconsistentStateError("both states impossible at agent " + std::to_string(n) +
                                 ", step " + std::to_string(t));
  if (w(0) == kNegInf) return 1.0;
  if (w(1) == kNegInf) return 0.0;
  return 1.0 / (1.0 + std::exp(w(0) - w(1)));
}

/// P(first of `remaining` independent rate-p trials succeeds | at least one does).
double first_success_given_any(double p, int remaining) {
  const double any = -std::expm1(remaining * std::log1p(-p));
  return p / any;
}

}  // namespace

double log_joint(const StateMatrix& x, const ObservationMatrix& y, const DynamicNetwork& network,
                 const ModelParams& params) {
  check_dimensions(network, x);
  check_dimensions(network, y);
  if (y.num_symptoms() != params.num_symptoms())
    throw std::invalid_argument("observation symptom count does not match emission table");
  const int n_agents = network.num_agents();
  const int n_steps = network.num_steps();

  double total = 0.0;
  for (Agent n = 0; n < n_agents; ++n) total += log_initial(x(n, 0), params);
  for (Step t = 0; t + 1 < n_steps; ++t)
    for (Agent n = 0; n < n_agents; ++n)
      total += log_transition(x(n, t), x(n, t + 1), infectious_contacts(network, x, n, t), params);
  for (Step t = 0; t < n_steps; ++t)
    for (Agent n = 0; n < n_agents; ++n)
      total += log_emission_probability(y.survey(n, t), x(n, t), params);
  return std::isnan(total) ? kNegInf : total;
}

Eigen::Vector2d site_log_weights(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                                 const DynamicNetwork& network, const ModelParams& params) {
  return site_weights(n, t, x, y, network, LogKernel(params));
}

double site_conditional(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                        const DynamicNetwork& network, const ModelParams& params) {
  return probability_of_one(site_log_weights(n, t, x, y, network, params), n, t);
}

int sample_state_site(Agent n, Step t, const StateMatrix& x, const ObservationMatrix& y,
                      const DynamicNetwork& network, const ModelParams& params, Rng& rng) {
  return bernoulli(rng, site_conditional(n, t, x, y, network, params)) ? 1 : 0;
}

EventCounts& EventCounts::operator+=(const EventCounts& o) {
  n_recoveries += o.n_recoveries;
  n_persist_infectious += o.n_persist_infectious;
  n_external_infections += o.n_external_infections;
  n_external_failures += o.n_external_failures;
  n_contact_infections += o.n_contact_infections;
  n_contact_failures += o.n_contact_failures;
  return *this;
}

InfectionCause sample_infection_cause(int k, const ModelParams& params, Rng& rng) {
  InfectionCause cause;
  if (params.variant == TransitionVariant::additive) {
    const double total = params.alpha + params.beta * k;
    if (!(total > 0.0))
      throw InconsistentStateError("infection observed with every channel rate at zero");
    if (uniform(rng) * total < params.alpha)
      cause.external = true;
    else
      cause.contact_successes = 1;
    return cause;
  }

  if (!(infection_probability(k, params) > 0.0))
    throw InconsistentStateError("infection observed with every channel rate at zero");
  // Trials in order external, contact 1..k. Until the first success each trial
  // is drawn conditioned on a success among the remaining ones; afterwards the
  // rest are unconditioned.
  const double p_external =
      params.alpha / -std::expm1(std::log1p(-params.alpha) + k * std::log1p(-params.beta));
  bool seen = bernoulli(rng, p_external);
  cause.external = seen;
  cause.external_failed = !seen;
  for (int j = 0; j < k; ++j) {
    const double p = seen ? params.beta : first_success_given_any(params.beta, k - j);
    if (bernoulli(rng, p)) {
      ++cause.contact_successes;
      seen = true;
    } else {
      ++cause.contact_failures;
    }
  }
  return cause;
}

EventCounts attribute_infection_events(const StateMatrix& x, const DynamicNetwork& network,
                                       const ModelParams& params, Rng& rng) {
  check_dimensions(network, x);
  EventCounts counts;
  for (Step t = 0; t + 1 < network.num_steps(); ++t) {
    for (Agent n = 0; n < network.num_agents(); ++n) {
      const int from = x(n, t);
      const int to = x(n, t + 1);
      if (from == 1) {
        (to == 0 ? counts.n_recoveries : counts.n_persist_infectious) += 1;
        continue;
      }
      const int k = infectious_contacts(network, x, n, t);
      if (to == 0) {
        counts.n_external_failures += 1;
        counts.n_contact_failures += k;
        continue;
      }
      const InfectionCause cause = sample_infection_cause(k, params, rng);
      counts.n_external_infections += cause.external;
      counts.n_external_failures += cause.external_failed;
      counts.n_contact_infections += cause.contact_successes;
      counts.n_contact_failures += cause.contact_failures;
    }
  }
  return counts;
}

EmissionCounts count_emissions(const StateMatrix& x, const ObservationMatrix& y) {
  if (x.rows() != y.num_agents() || x.cols() != y.num_steps())
    throw std::invalid_argument("state and observation dimensions differ");
  const int n_symptoms = y.num_symptoms();
  EmissionCounts c{Eigen::Matrix<long, Eigen::Dynamic, 2>::Zero(n_symptoms, 2),
                   Eigen::Matrix<long, Eigen::Dynamic, 2>::Zero(n_symptoms, 2)};
  for (Step t = 0; t < y.num_steps(); ++t) {
    for (Agent n = 0; n < y.num_agents(); ++n) {
      const int state = x(n, t);
      const auto survey = y.survey(n, t);
      for (int s = 0; s < n_symptoms; ++s) {
        if (survey[s] == Report::present)
          ++c.present(s, state);
        else if (survey[s] == Report::absent)
          ++c.absent(s, state);
      }
    }
  }
  return c;
}

ParameterPosteriors parameter_posteriors(const EventCounts& counts, const Priors& priors,
                                         const EmissionCounts& emission_counts) {
  ParameterPosteriors post;
  post.alpha =
      beta_posterior(priors.alpha, counts.n_external_infections, counts.n_external_failures);
  post.beta = beta_posterior(priors.beta, counts.n_contact_infections, counts.n_contact_failures);
  post.gamma = beta_posterior(priors.gamma, counts.n_recoveries, counts.n_persist_infectious);
  const auto n_symptoms = static_cast<Eigen::Index>(priors.emission.size());
  if (emission_counts.present.rows() != n_symptoms || emission_counts.absent.rows() != n_symptoms)
    throw std::invalid_argument("emission counts do not match emission priors");
  post.emission.resize(priors.emission.size());
  for (Eigen::Index s = 0; s < n_symptoms; ++s)
    for (int x = 0; x < 2; ++x)
      post.emission[s][x] = beta_posterior(priors.emission[s][x], emission_counts.present(s, x),
                                           emission_counts.absent(s, x));
  return post;
}

ModelParams update_parameters(const EventCounts& counts, const Priors& priors,
                              const EmissionCounts& emission_counts, const ModelParams& current,
                              Rng& rng) {
  const ParameterPosteriors post = parameter_posteriors(counts, priors, emission_counts);
  ModelParams next = current;
  next.alpha = beta_draw(rng, post.alpha.a, post.alpha.b);
  next.beta = beta_draw(rng, post.beta.a, post.beta.b);
  next.gamma = beta_draw(rng, post.gamma.a, post.gamma.b);
  next.emissions.resize(static_cast<Eigen::Index>(post.emission.size()), 2);
  for (std::size_t s = 0; s < post.emission.size(); ++s)
    for (int x = 0; x < 2; ++x)
      next.emissions(static_cast<Eigen::Index>(s), x) =
          beta_draw(rng, post.emission[s][x].a, post.emission[s][x].b);
  return next;
}

ModelParams sample_from_priors(const Priors& priors, TransitionVariant variant,
                               double initial_infected, Rng& rng) {
  validate(priors);
  ModelParams p;
  p.variant = variant;
  p.initial_infected = initial_infected;
  p.alpha = beta_draw(rng, priors.alpha.a, priors.alpha.b);
  p.beta = beta_draw(rng, priors.beta.a, priors.beta.b);
  p.gamma = beta_draw(rng, priors.gamma.a, priors.gamma.b);
  p.emissions.resize(static_cast<Eigen::Index>(priors.emission.size()), 2);
  for (std::size_t s = 0; s < priors.emission.size(); ++s)
    for (int x = 0; x < 2; ++x)
      p.emissions(static_cast<Eigen::Index>(s), x) =
          beta_draw(rng, priors.emission[s][x].a, priors.emission[s][x].b);
  return p;
}

void validate(const GibbsConfig& config) {
  if (config.n_iterations < 1) throw std::invalid_argument("n_iterations must be positive");
  if (config.n_burn_in < 0 || config.n_burn_in >= config.n_iterations)
    throw std::invalid_argument("n_burn_in must lie in [0, n_iterations)");
  if (config.thinning < 1) throw std::invalid_argument("thinning must be at least 1");
  if (!(config.initial_infected >= 0.0 && config.initial_infected <= 1.0))
    throw std::invalid_argument("initial_infected must lie in [0, 1]");
}

PosteriorSummary merge(const std::vector<PosteriorSummary>& chains) {
  if (chains.empty()) throw std::invalid_argument("no chains to merge");
  PosteriorSummary out;
  out.marginals = Eigen::MatrixXd::Zero(chains.front().marginals.rows(),
                                        chains.front().marginals.cols());
  long total = 0;
  for (const auto& c : chains) {
    if (c.marginals.rows() != out.marginals.rows() || c.marginals.cols() != out.marginals.cols())
      throw std::invalid_argument("chains have different dimensions");
    out.marginals += c.marginals * static_cast<double>(c.kept_samples());
    total += c.kept_samples();
    out.trace.insert(out.trace.end(), c.trace.begin(), c.trace.end());
    out.n_iterations += c.n_iterations;
    out.n_burn_in += c.n_burn_in;
  }
  if (total > 0) out.marginals /= static_cast<double>(total);
  out.thinning = chains.front().thinning;
  return out;
}

TraceStats trace_stats(const std::vector<ParamSample>& trace, double ParamSample::*field) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  Eigen::VectorXd v(static_cast<Eigen::Index>(trace.size()));
  for (std::size_t i = 0; i < trace.size(); ++i) v(static_cast<Eigen::Index>(i)) = trace[i].*field;
  const double mean = v.mean();
  const double var =
      trace.size() > 1 ? (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1) : 0.0;
  return {mean, std::sqrt(var)};
}

StateMatrix initial_states_from_symptoms(const ObservationMatrix& y, StateInit policy) {
  StateMatrix x = StateMatrix::Zero(y.num_agents(), y.num_steps());
  for (Step t = 0; t < y.num_steps(); ++t)
    for (Agent n = 0; n < y.num_agents(); ++n) x(n, t) = y.present_count(n, t) >= 1 ? 1 : 0;
  if (policy == StateInit::any_symptom) return x;
  // Isolated reports are more often false positives than one-step infections;
  // starting them as infections pins the false-positive rate near zero.
  StateMatrix runs = x;
  for (Step t = 0; t < y.num_steps(); ++t)
    for (Agent n = 0; n < y.num_agents(); ++n) {
      if (!x(n, t)) continue;
      const bool before = t > 0 && x(n, t - 1);
      const bool after = t + 1 < y.num_steps() && x(n, t + 1);
      runs(n, t) = before || after ? 1 : 0;
    }
  return runs;
}

PosteriorSummary run_gibbs(const ObservationMatrix& y, const DynamicNetwork& network,
                           const Priors& priors, const GibbsConfig& config) {
  validate(config);
  check_dimensions(network, y);
  const bool needs_priors =
      config.update_transitions || config.update_emissions || !config.initial_params;
  if (needs_priors) {
    validate(priors);
    if (static_cast<int>(priors.emission.size()) != y.num_symptoms())
      throw std::invalid_argument("emission priors do not match symptom count");
  }

  Rng rng = make_rng(config.seed);
  ModelParams params = config.initial_params
                           ? *config.initial_params
                           : sample_from_priors(priors, config.variant, config.initial_infected, rng);
  params.variant = config.variant;
  params.initial_infected = config.initial_infected;
  validate(params);
  if (params.num_symptoms() != y.num_symptoms())
    throw std::invalid_argument("emission table does not match symptom count");

  const int n_agents = network.num_agents();
  const int n_steps = network.num_steps();
  StateMatrix x = initial_states_from_symptoms(y, config.init);
  if (config.initial_infected == 0.0) x.col(0).setZero();
  if (config.initial_infected == 1.0) x.col(0).setOnes();

  // Condition the starting parameters on the starting states. Running the
  // first sweep under raw prior draws lets an emission draw with
  // theta(s, 0) > theta(s, 1) lock the chain into the label-swapped mode.
  auto update = [&] {
    const EventCounts events = attribute_infection_events(x, network, params, rng);
    const EmissionCounts emitted = count_emissions(x, y);
    const ModelParams drawn = update_parameters(events, priors, emitted, params, rng);
    if (config.update_transitions) {
      params.alpha = drawn.alpha;
      params.beta = drawn.beta;
      params.gamma = drawn.gamma;
    }
    if (config.update_emissions) params.emissions = drawn.emissions;
  };
  const bool updating = config.update_transitions || config.update_emissions;
  if (updating && !config.initial_params) update();

  PosteriorSummary summary;
  summary.marginals = Eigen::MatrixXd::Zero(n_agents, n_steps);
  summary.n_iterations = config.n_iterations;
  summary.n_burn_in = config.n_burn_in;
  summary.thinning = config.thinning;
  summary.trace.reserve(static_cast<std::size_t>(config.kept_samples()));
  Eigen::MatrixXi accumulated = Eigen::MatrixXi::Zero(n_agents, n_steps);

  const int sites = n_agents * n_steps;
  for (int iter = 0; iter < config.n_iterations; ++iter) {
    {
      const LogKernel kernel(params);
      auto update_site = [&](Agent n, Step t) {
        const Eigen::Vector2d w = site_weights(n, t, x, y, network, kernel);
        // An impossible neighborhood (additive clamp) gives no preference;
        // later sweeps move the chain back onto the support.
        const double p1 = (w(0) == kNegInf && w(1) == kNegInf) ? 0.5 : probability_of_one(w, n, t);
        x(n, t) = bernoulli(rng, p1) ? 1 : 0;
      };
      if (config.scan == ScanOrder::systematic) {
        for (Step t = 0; t < n_steps; ++t)
          for (Agent n = 0; n < n_agents; ++n) update_site(n, t);
      } else {
        for (int i = 0; i < sites; ++i) {
          const int site = uniform_int(rng, 0, sites - 1);
          update_site(site % n_agents, site / n_agents);
        }
      }
    }

    if (updating) update();

    const int past_burn_in = iter - config.n_burn_in + 1;
    if (past_burn_in > 0 && past_burn_in % config.thinning == 0 &&
        summary.kept_samples() < config.kept_samples()) {
      accumulated += x.cast<int>();
      summary.trace.push_back({params.alpha, params.beta, params.gamma, params.emissions});
    }
  }
  if (summary.kept_samples() > 0)
    summary.marginals = accumulated.cast<double>() / static_cast<double>(summary.kept_samples());
  return summary;
}

StateMatrix impute_states(const PosteriorSummary& summary, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0))
    throw std::invalid_argument("threshold must lie in [0, 1]");
  return (summary.marginals.array() >= threshold).cast<std::uint8_t>().matrix();
}

}  // namespace sisnet
