#include "sisnet/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sisnet {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void require_probability(double p, const char* name) {
  if (!is_probability(p))
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1], got " +
                                std::to_string(p));
}

void require_prior(const BetaPrior& prior, const char* name) {
  if (!(prior.a > 0.0) || !(prior.b > 0.0))
    throw std::invalid_argument(std::string("Beta hyperparameters of ") + name +
                                " must be positive");
}

}  // namespace

ObservationMatrix::ObservationMatrix(int num_agents, int num_steps, int num_symptoms)
    : num_agents_(num_agents), num_steps_(num_steps), num_symptoms_(num_symptoms) {
  if (num_agents < 1 || num_steps < 1 || num_symptoms < 1)
    throw std::invalid_argument("observation dimensions must be positive");
  values_.assign(std::size_t(num_agents) * num_steps * num_symptoms, Report::missing);
}

std::size_t ObservationMatrix::offset(Agent n, Step t) const {
  if (n < 0 || n >= num_agents_ || t < 0 || t >= num_steps_)
    throw std::out_of_range("survey (" + std::to_string(n) + ", " + std::to_string(t) +
                            ") out of range");
  return (std::size_t(t) * num_agents_ + n) * num_symptoms_;
}

std::size_t ObservationMatrix::symptom(int s) const {
  if (s < 0 || s >= num_symptoms_) throw std::out_of_range("symptom " + std::to_string(s));
  return static_cast<std::size_t>(s);
}

void ObservationMatrix::set_survey(Agent n, Step t, std::span<const Report> reports) {
  if (static_cast<int>(reports.size()) != num_symptoms_)
    throw std::invalid_argument("survey has " + std::to_string(reports.size()) +
                                " symptoms, expected " + std::to_string(num_symptoms_));
  std::copy(reports.begin(), reports.end(), values_.begin() + offset(n, t));
}

void ObservationMatrix::set_missing(Agent n, Step t) {
  std::fill_n(values_.begin() + offset(n, t), num_symptoms_, Report::missing);
}

bool ObservationMatrix::surveyed(Agent n, Step t) const {
  for (Report r : survey(n, t))
    if (r != Report::missing) return true;
  return false;
}

int ObservationMatrix::present_count(Agent n, Step t) const {
  int count = 0;
  for (Report r : survey(n, t)) count += r == Report::present;
  return count;
}

std::string_view to_string(TransitionVariant v) {
  return v == TransitionVariant::additive ? "additive" : "independent";
}

TransitionVariant parse_variant(std::string_view name) {
  if (name == "independent" || name == "independent-trials")
    return TransitionVariant::independent_trials;
  if (name == "additive") return TransitionVariant::additive;
  throw std::invalid_argument("unknown transition variant '" + std::string(name) + "'");
}

void validate(const ModelParams& params) {
  require_probability(params.alpha, "alpha");
  require_probability(params.beta, "beta");
  require_probability(params.gamma, "gamma");
  require_probability(params.initial_infected, "initial_infected");
  if (params.emissions.rows() < 1) throw std::invalid_argument("no emission rows");
  for (Eigen::Index s = 0; s < params.emissions.rows(); ++s)
    for (int x = 0; x < 2; ++x) require_probability(params.emissions(s, x), "emission");
}

Priors Priors::uniform(int num_symptoms) {
  Priors p;
  p.emission.assign(num_symptoms, {BetaPrior{}, BetaPrior{}});
  return p;
}

Priors Priors::informative(int num_symptoms) {
  Priors p;
  p.alpha = {1.0, 99.0};
  p.beta = {2.0, 48.0};
  p.gamma = {5.0, 15.0};
  p.emission.assign(num_symptoms, {BetaPrior{1.0, 19.0}, BetaPrior{3.0, 2.0}});
  return p;
}

void validate(const Priors& priors) {
  require_prior(priors.alpha, "alpha");
  require_prior(priors.beta, "beta");
  require_prior(priors.gamma, "gamma");
  if (priors.emission.empty()) throw std::invalid_argument("no emission priors");
  for (const auto& row : priors.emission) {
    require_prior(row[0], "emission");
    require_prior(row[1], "emission");
  }
}

double log_emission_probability(std::span<const Report> y, int x, const ModelParams& params) {
  if (static_cast<Eigen::Index>(y.size()) != params.emissions.rows())
    throw std::invalid_argument("symptom vector length does not match emission table");
  double total = 0.0;
  for (std::size_t s = 0; s < y.size(); ++s) {
    const double theta = params.emissions(static_cast<Eigen::Index>(s), x);
    if (y[s] == Report::present)
      total += std::log(theta);
    else if (y[s] == Report::absent)
      total += std::log1p(-theta);
  }
  return total;
}

int infectious_contacts(const DynamicNetwork& network, const StateMatrix& x, Agent n, Step t) {
  int k = 0;
  for (Agent m : network.neighbors(t, n)) k += x(m, t);
  return k;
}

void check_dimensions(const DynamicNetwork& network, const StateMatrix& x) {
  if (x.rows() != network.num_agents() || x.cols() != network.num_steps())
    throw std::invalid_argument("state matrix is " + std::to_string(x.rows()) + "x" +
                                std::to_string(x.cols()) + ", network is " +
                                std::to_string(network.num_agents()) + "x" +
                                std::to_string(network.num_steps()));
}

void check_dimensions(const DynamicNetwork& network, const ObservationMatrix& y) {
  if (y.num_agents() != network.num_agents() || y.num_steps() != network.num_steps())
    throw std::invalid_argument("observations do not match network dimensions");
}

}  // namespace sisnet
