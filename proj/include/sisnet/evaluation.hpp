#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "sisnet/model.hpp"
#include "sisnet/network.hpp"

namespace sisnet {

// ---------------------------------------------------------------------------
// ROC

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;
};

struct RocCurve {
  std::vector<RocPoint> points;  ///< from (0, 0) to (1, 1), thresholds descending
  double auc = 0.0;
};

/// Sweeps every distinct score as a threshold; AUC by the trapezoid rule.
/// Throws std::invalid_argument when truth lacks positives or negatives.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> truth);

/// TPR of a curve at an arbitrary FPR, linearly interpolated.
double tpr_at(const RocCurve& curve, double fpr);

/// Vertical average of several curves over an evenly spaced FPR grid; the
/// reported AUC is the mean of the input AUCs.
RocCurve average_curves(std::span<const RocCurve> curves, int grid_points = 101);

// ---------------------------------------------------------------------------
// Baseline classifier

/// Infectious-contact counts at the previous, current and next step.
using ContactFeatures = Eigen::Vector3d;

struct ClassWeights {
  double susceptible = 1.0;
  double infected = 1.0;

  /// Inverse class frequency, so both classes carry equal total weight.
  static ClassWeights balanced(std::span<const std::uint8_t> labels);
};

/// Class-weighted logistic scorer on contact-count features, fitted by
/// Newton iterations with a small ridge penalty. Weights are normalized to
/// sum to one over the training set, so only their ratio matters.
class LinearBaseline {
 public:
  static LinearBaseline train(std::span<const ContactFeatures> features,
                              std::span<const std::uint8_t> labels, ClassWeights weights);

  /// Decision value w.f + b; larger means more likely infected.
  double score(const ContactFeatures& f) const { return coef_.dot(f) + intercept_; }
  int classify(const ContactFeatures& f) const { return score(f) >= 0.0 ? 1 : 0; }

  const Eigen::Vector3d& coefficients() const { return coef_; }
  double intercept() const { return intercept_; }

 private:
  Eigen::Vector3d coef_ = Eigen::Vector3d::Zero();
  double intercept_ = 0.0;
};

/// Feature vector of agent n at step t where `infectious(m, t)` marks which
/// contacts count as infectious. Steps outside [0, T) contribute zero.
template <typename InfectiousFn>
ContactFeatures contact_features(const DynamicNetwork& network, Agent n, Step t,
                                 InfectiousFn&& infectious) {
  ContactFeatures f = ContactFeatures::Zero();
  for (int d = -1; d <= 1; ++d) {
    const Step s = t + d;
    if (s < 0 || s >= network.num_steps()) continue;
    for (Agent m : network.neighbors(s, n)) f(d + 1) += infectious(m, s) ? 1.0 : 0.0;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Statistical tests

struct PermutationResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_permutations = 0;
};

/// Sum over agents and days of friends reporting the same symptom that day.
double shared_symptom_statistic(const StaticGraph& friends,
                                std::span<const std::set<int>> symptom_days);

/// Shuffles which day set belongs to which graph node; p = (1 + #{perm >= obs}) / (n + 1).
PermutationResult permutation_test(const StaticGraph& friends,
                                   std::span<const std::set<int>> symptom_days,
                                   int n_permutations, std::uint64_t seed);

struct ExponentialFit {
  double rate = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 0.0;

  double mean() const { return 1.0 / rate; }
};

/// Complement of the asymptotic Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

/// Maximum-likelihood rate plus a one-sample KS test against the fitted CDF.
ExponentialFit fit_duration_exponential(std::span<const double> runs);

struct ExposureResponseFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
};

/// Least-squares fit of p(k) = 1 - a exp(-b k).
ExposureResponseFit fit_exposure_response(std::span<const std::pair<double, double>> points);

}  // namespace sisnet
