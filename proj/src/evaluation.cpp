#include "sisnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sisnet/rng.hpp"

namespace sisnet {

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  if (scores.size() != truth.size())
    throw std::invalid_argument("scores and truth differ in length");
  const auto positives = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  const auto negatives = static_cast<double>(truth.size()) - positives;
  if (positives == 0) throw std::invalid_argument("ROC truth has no positive cases");
  if (negatives == 0) throw std::invalid_argument("ROC truth has no negative cases");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return scores[i] > scores[j]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  double tp = 0.0;
  double fp = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == threshold; ++i)
      (truth[order[i]] ? tp : fp) += 1.0;
    const RocPoint prev = curve.points.back();
    const RocPoint next{fp / negatives, tp / positives, threshold};
    curve.auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
    curve.points.push_back(next);
  }
  return curve;
}

double tpr_at(const RocCurve& curve, double fpr) {
  const auto& pts = curve.points;
  if (pts.empty()) throw std::invalid_argument("empty ROC curve");
  std::size_t j = 0;
  while (j + 1 < pts.size() && pts[j + 1].fpr <= fpr) ++j;
  if (j + 1 == pts.size() || pts[j].fpr == fpr) return pts[j].tpr;
  const RocPoint& a = pts[j];
  const RocPoint& b = pts[j + 1];
  return a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr);
}

RocCurve average_curves(std::span<const RocCurve> curves, int grid_points) {
  if (curves.empty()) throw std::invalid_argument("no curves to average");
  if (grid_points < 2) throw std::invalid_argument("need at least two grid points");
  RocCurve avg;
  avg.points.push_back({0.0, 0.0, std::numeric_limits<double>::quiet_NaN()});
  for (int i = 0; i < grid_points; ++i) {
    const double f = static_cast<double>(i) / (grid_points - 1);
    double tpr = 0.0;
    for (const auto& c : curves) tpr += tpr_at(c, f);
    avg.points.push_back({f, tpr / static_cast<double>(curves.size()),
                          std::numeric_limits<double>::quiet_NaN()});
  }
  for (const auto& c : curves) avg.auc += c.auc;
  avg.auc /= static_cast<double>(curves.size());
  return avg;
}

ClassWeights ClassWeights::balanced(std::span<const std::uint8_t> labels) {
  const auto n = static_cast<double>(labels.size());
  const auto pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double neg = n - pos;
  return {neg > 0 ? n / (2.0 * neg) : 1.0, pos > 0 ? n / (2.0 * pos) : 1.0};
}

LinearBaseline LinearBaseline::train(std::span<const ContactFeatures> features,
                                     std::span<const std::uint8_t> labels, ClassWeights weights) {
  if (features.empty()) throw std::invalid_argument("empty training set");
  if (features.size() != labels.size())
    throw std::invalid_argument("features and labels differ in length");
  if (!(weights.susceptible > 0.0) || !(weights.infected > 0.0))
    throw std::invalid_argument("class weights must be positive");

  LinearBaseline model;
  const auto n = static_cast<Eigen::Index>(features.size());
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  if (pos == 0 || pos == n) {
    model.intercept_ = pos == 0 ? -1.0 : 1.0;
    return model;
  }

  Eigen::MatrixXd design(n, 4);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design.row(i) << features[i].transpose(), 1.0;
    y(i) = labels[i];
    w(i) = labels[i] ? weights.infected : weights.susceptible;
  }
  w /= w.sum();

  constexpr double ridge = 1e-4;
  Eigen::Vector4d penalty(ridge, ridge, ridge, 0.0);
  auto objective = [&](const Eigen::Vector4d& theta) {
    const Eigen::ArrayXd z = design * theta;
    // log(1 + e^z) - y z, stable for large |z|
    const Eigen::ArrayXd softplus = z.max(0.0) + (-z.abs()).exp().log1p();
    return (w.array() * (softplus - y.array() * z)).sum() +
           0.5 * (penalty.array() * theta.array().square()).sum();
  };

  Eigen::Vector4d theta = Eigen::Vector4d::Zero();
  double current = objective(theta);
  for (int iter = 0; iter < 200; ++iter) {
    const Eigen::ArrayXd z = design * theta;
    const Eigen::ArrayXd prob = 1.0 / (1.0 + (-z).exp());
    const Eigen::Vector4d grad =
        design.transpose() * (w.array() * (prob - y.array())).matrix() +
        (penalty.array() * theta.array()).matrix();
    Eigen::Matrix4d hess = design.transpose() *
                           (w.array() * prob * (1.0 - prob)).matrix().asDiagonal() * design;
    hess.diagonal() += penalty;
    hess.diagonal().array() += 1e-12;
    const Eigen::Vector4d step = hess.ldlt().solve(grad);
    double scale = 1.0;
    Eigen::Vector4d candidate = theta - step;
    double value = objective(candidate);
    while (value > current && scale > 1e-8) {
      scale *= 0.5;
      candidate = theta - scale * step;
      value = objective(candidate);
    }
    const double change = (candidate - theta).norm();
    theta = candidate;
    current = value;
    if (change < 1e-10) break;
  }
  model.coef_ = theta.head<3>();
  model.intercept_ = theta(3);
  return model;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd overlap_matrix(std::span<const std::set<int>> days) {
  const auto n = static_cast<Eigen::Index>(days.size());
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double shared = 0.0;
      for (int d : days[i]) shared += days[j].count(d) ? 1.0 : 0.0;
      overlap(i, j) = overlap(j, i) = shared;
    }
  }
  return overlap;
}

void check_graph(const StaticGraph& friends, std::size_t n_day_sets) {
  if (friends.num_agents < 1) throw std::invalid_argument("friendship graph has no agents");
  if (static_cast<std::size_t>(friends.num_agents) != n_day_sets)
    throw std::invalid_argument("one symptom day set per graph node required");
  for (const auto& e : friends.edges)
    if (e.a < 0 || e.b < 0 || e.a >= friends.num_agents || e.b >= friends.num_agents || e.a == e.b)
      throw std::invalid_argument("invalid friendship edge");
}

double permuted_statistic(const StaticGraph& friends, const Eigen::MatrixXd& overlap,
                          const std::vector<int>& owner) {
  double total = 0.0;
  for (const auto& e : friends.edges) total += overlap(owner[e.a], owner[e.b]);
  return 2.0 * total;
}

}  // namespace

double shared_symptom_statistic(const StaticGraph& friends,
                                std::span<const std::set<int>> symptom_days) {
  check_graph(friends, symptom_days.size());
  std::vector<int> identity(symptom_days.size());
  std::iota(identity.begin(), identity.end(), 0);
  return permuted_statistic(friends, overlap_matrix(symptom_days), identity);
}

PermutationResult permutation_test(const StaticGraph& friends,
                                   std::span<const std::set<int>> symptom_days,
                                   int n_permutations, std::uint64_t seed) {
  if (n_permutations < 1) throw std::invalid_argument("need at least one permutation");
  check_graph(friends, symptom_days.size());
  const Eigen::MatrixXd overlap = overlap_matrix(symptom_days);
  std::vector<int> owner(symptom_days.size());
  std::iota(owner.begin(), owner.end(), 0);

  PermutationResult result;
  result.n_permutations = n_permutations;
  result.statistic = permuted_statistic(friends, overlap, owner);

  Rng rng = make_rng(seed, 0x7065726d);
  int at_least = 0;
  for (int p = 0; p < n_permutations; ++p) {
    for (int i = static_cast<int>(owner.size()) - 1; i > 0; --i)
      std::swap(owner[i], owner[uniform_int(rng, 0, i)]);
    if (permuted_statistic(friends, overlap, owner) >= result.statistic) ++at_least;
  }
  result.p_value = (1.0 + at_least) / (1.0 + n_permutations);
  return result;
}

double kolmogorov_survival(double lambda) {
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

ExponentialFit fit_duration_exponential(std::span<const double> runs) {
  if (runs.empty()) throw std::invalid_argument("no durations to fit");
  for (double r : runs)
    if (!(r > 0.0) || !std::isfinite(r))
      throw std::invalid_argument("durations must be positive and finite");

  std::vector<double> sorted(runs.begin(), runs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;

  ExponentialFit fit;
  fit.rate = 1.0 / mean;
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = -std::expm1(-fit.rate * sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  fit.ks_statistic = d;
  fit.ks_p_value = kolmogorov_survival(std::sqrt(n) * d);
  return fit;
}

ExposureResponseFit fit_exposure_response(std::span<const std::pair<double, double>> points) {
  std::vector<double> ks;
  for (const auto& [k, p] : points) {
    if (!std::isfinite(k) || !std::isfinite(p))
      throw std::invalid_argument("exposure-response points must be finite");
    ks.push_back(k);
  }
  std::sort(ks.begin(), ks.end());
  if (std::unique(ks.begin(), ks.end()) - ks.begin() < 3)
    throw std::invalid_argument("need at least three distinct contact counts");
  const bool flat = std::all_of(points.begin(), points.end(),
                                [&](const auto& pt) { return pt.second == points[0].second; });
  if (flat && points[0].second >= 1.0)
    throw std::runtime_error("exposure-response fit failed: response saturated at 1");

  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd k(n), p(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i) = points[i].first;
    p(i) = points[i].second;
  }

  // Start from the log-linear fit log(1 - p) = log a - b k where defined.
  double a = 1.0;
  double b = 0.0;
  {
    std::vector<Eigen::Index> usable;
    for (Eigen::Index i = 0; i < n; ++i)
      if (p(i) < 1.0) usable.push_back(i);
    if (usable.size() >= 2) {
      Eigen::MatrixXd design(static_cast<Eigen::Index>(usable.size()), 2);
      Eigen::VectorXd rhs(static_cast<Eigen::Index>(usable.size()));
      for (std::size_t j = 0; j < usable.size(); ++j) {
        design.row(static_cast<Eigen::Index>(j)) << 1.0, k(usable[j]);
        rhs(static_cast<Eigen::Index>(j)) = std::log1p(-p(usable[j]));
      }
      const Eigen::Vector2d sol = design.colPivHouseholderQr().solve(rhs);
      if (sol.allFinite()) {
        a = std::exp(sol(0));
        b = -sol(1);
      }
    }
  }

  auto residuals = [&](double aa, double bb) -> Eigen::VectorXd {
    return p - (1.0 - aa * (-bb * k.array()).exp()).matrix();
  };
  Eigen::VectorXd r = residuals(a, b);
  double sse = r.squaredNorm();
  double damping = 1e-3;
  for (int iter = 0; iter < 500 && sse > 0.0; ++iter) {
    const Eigen::ArrayXd e = (-b * k.array()).exp();
    Eigen::MatrixXd jac(n, 2);  // d model / d(a, b)
    jac.col(0) = (-e).matrix();
    jac.col(1) = (a * k.array() * e).matrix();
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d jtr = jac.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries) {
      Eigen::Matrix2d lhs = jtj;
      lhs.diagonal() *= 1.0 + damping;
      lhs.diagonal().array() += 1e-300;
      const Eigen::Vector2d step = lhs.ldlt().solve(jtr);
      const Eigen::VectorXd r_new = residuals(a + step(0), b + step(1));
      const double sse_new = r_new.squaredNorm();
      if (std::isfinite(sse_new) && sse_new < sse) {
        a += step(0);
        b += step(1);
        const double gain = sse - sse_new;
        r = r_new;
        sse = sse_new;
        damping = std::max(damping / 3.0, 1e-12);
        improved = true;
        if (gain < 1e-16 * (1.0 + sse)) iter = 500;
        break;
      }
      damping *= 4.0;
    }
    if (!improved) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::runtime_error("exposure-response fit failed to converge");

  ExposureResponseFit fit{a, b, 0.0};
  const double sst = (p.array() - p.mean()).square().sum();
  fit.r_squared = sst > 0.0 ? 1.0 - sse / sst : (sse < 1e-24 ? 1.0 : 0.0);
  return fit;
}

}  // namespace sisnet
