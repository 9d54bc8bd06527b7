#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sisnet/io.hpp"
#include "sisnet/network.hpp"

namespace sisnet {

/// Steps at which each agent pair was in contact.
Eigen::MatrixXd contact_frequency(const DynamicNetwork& network);

struct Merge {
  int left;   ///< cluster ids: 0..N-1 are agents, N + i is the i-th merge
  int right;
  double distance;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<Agent> leaf_order;
};

/// Average-linkage agglomerative clustering under d(i, j) = 1 / (1 + contacts).
/// Ties resolve toward the lowest cluster ids, so the ordering is deterministic.
Dendrogram cluster_by_contact(const DynamicNetwork& network);

/// Marginal heat map with rows in dendrogram order. Columns are labelled by
/// ISO date counted from `start_date` (YYYY-MM-DD) when given, else by step.
LabeledMatrix heatmap_table(const Eigen::MatrixXd& marginals, const DynamicNetwork& network,
                            const std::optional<std::string>& start_date = std::nullopt);

}  // namespace sisnet
