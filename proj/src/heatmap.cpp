#include "sisnet/heatmap.hpp"

#include <chrono>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace sisnet {

Eigen::MatrixXd contact_frequency(const DynamicNetwork& network) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(network.num_agents(), network.num_agents());
  for (Step t = 0; t < network.num_steps(); ++t)
    for (const Contact& c : network.edges(t)) {
      w(c.a, c.b) += 1.0;
      w(c.b, c.a) += 1.0;
    }
  return w;
}

Dendrogram cluster_by_contact(const DynamicNetwork& network) {
  const int n = network.num_agents();
  const Eigen::MatrixXd dist = (1.0 + contact_frequency(network).array()).inverse().matrix();

  struct Cluster {
    int id;
    std::vector<Agent> leaves;
  };
  std::vector<Cluster> active;
  for (Agent a = 0; a < n; ++a) active.push_back({a, {a}});

  auto linkage = [&](const Cluster& x, const Cluster& y) {
    double total = 0.0;
    for (Agent i : x.leaves)
      for (Agent j : y.leaves) total += dist(i, j);
    return total / static_cast<double>(x.leaves.size() * y.leaves.size());
  };

  Dendrogram tree;
  int next_id = n;
  while (active.size() > 1) {
    std::size_t best_i = 0, best_j = 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < active.size(); ++i)
      for (std::size_t j = i + 1; j < active.size(); ++j) {
        const double d = linkage(active[i], active[j]);
        if (d < best) {
          best = d;
          best_i = i;
          best_j = j;
        }
      }
    Cluster merged{next_id++, active[best_i].leaves};
    merged.leaves.insert(merged.leaves.end(), active[best_j].leaves.begin(),
                         active[best_j].leaves.end());
    tree.merges.push_back({active[best_i].id, active[best_j].id, best});
    active.erase(active.begin() + static_cast<long>(best_j));
    active[best_i] = std::move(merged);
  }
  tree.leaf_order = active.front().leaves;
  return tree;
}

namespace {

std::string date_label(const std::chrono::sys_days& start, int offset) {
  const std::chrono::year_month_day ymd{start + std::chrono::days(offset)};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::chrono::sys_days parse_date(const std::string& text) {
  int y = 0;
  unsigned m = 0, d = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3)
    throw std::invalid_argument("start date must be YYYY-MM-DD, got '" + text + "'");
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m),
                                        std::chrono::day(d)};
  if (!ymd.ok()) throw std::invalid_argument("invalid start date '" + text + "'");
  return std::chrono::sys_days(ymd);
}

}  // namespace

LabeledMatrix heatmap_table(const Eigen::MatrixXd& marginals, const DynamicNetwork& network,
                            const std::optional<std::string>& start_date) {
  if (marginals.rows() != network.num_agents() || marginals.cols() != network.num_steps())
    throw std::invalid_argument("marginals do not match network dimensions");
  const Dendrogram tree = cluster_by_contact(network);
  LabeledMatrix m;
  m.values.resize(marginals.rows(), marginals.cols());
  for (std::size_t i = 0; i < tree.leaf_order.size(); ++i) {
    const Agent a = tree.leaf_order[i];
    m.row_labels.push_back(std::to_string(a + 1));
    m.values.row(static_cast<Eigen::Index>(i)) = marginals.row(a);
  }
  std::optional<std::chrono::sys_days> start;
  if (start_date) start = parse_date(*start_date);
  for (Step t = 0; t < network.num_steps(); ++t)
    m.col_labels.push_back(start ? date_label(*start, t) : std::to_string(t + 1));
  return m;
}

}  // namespace sisnet
