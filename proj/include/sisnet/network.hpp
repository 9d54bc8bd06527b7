#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace sisnet {

using Agent = int;
using Step = int;

/// Unordered contact pair, stored with first < second.
struct Contact {
  Agent a;
  Agent b;

  friend auto operator<=>(const Contact&, const Contact&) = default;
};

/// Time-indexed sequence of undirected contact sets over a fixed population.
///
/// Steps are 0-based; the contacts at step t drive the transition t -> t+1.
/// Edges are canonicalized on construction and duplicates are rejected, so a
/// constructed network always satisfies its invariants.
class DynamicNetwork {
 public:
  DynamicNetwork(int num_agents, int num_steps);
  DynamicNetwork(int num_agents, int num_steps,
                 std::vector<std::vector<Contact>> edges_per_step);

  int num_agents() const { return num_agents_; }
  int num_steps() const { return num_steps_; }

  std::span<const Contact> edges(Step t) const { return edges_[check_step(t)]; }
  std::span<const Agent> neighbors(Step t, Agent n) const;
  bool has_edge(Step t, Agent a, Agent b) const;
  std::size_t num_edges() const;

  friend bool operator==(const DynamicNetwork& lhs, const DynamicNetwork& rhs) {
    return lhs.num_agents_ == rhs.num_agents_ && lhs.num_steps_ == rhs.num_steps_ &&
           lhs.edges_ == rhs.edges_;
  }

 private:
  std::size_t check_step(Step t) const;
  void build_adjacency();

  int num_agents_;
  int num_steps_;
  std::vector<std::vector<Contact>> edges_;
  // CSR adjacency per step: offsets_[t][n]..offsets_[t][n+1] into adjacent_[t].
  std::vector<std::vector<std::size_t>> offsets_;
  std::vector<std::vector<Agent>> adjacent_;
};

/// Canonical (min, max) form; throws std::invalid_argument on a self loop.
Contact make_contact(Agent a, Agent b);

/// Static undirected graph (e.g. friendships), one agent set, no time axis.
struct StaticGraph {
  int num_agents = 0;
  std::vector<Contact> edges;
};

}  // namespace sisnet
