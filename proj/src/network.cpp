#include "sisnet/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sisnet {

Contact make_contact(Agent a, Agent b) {
  if (a == b) throw std::invalid_argument("self contact for agent " + std::to_string(a));
  return a < b ? Contact{a, b} : Contact{b, a};
}

DynamicNetwork::DynamicNetwork(int num_agents, int num_steps)
    : DynamicNetwork(num_agents, num_steps,
                     std::vector<std::vector<Contact>>(num_steps > 0 ? num_steps : 0)) {}

DynamicNetwork::DynamicNetwork(int num_agents, int num_steps,
                               std::vector<std::vector<Contact>> edges_per_step)
    : num_agents_(num_agents), num_steps_(num_steps), edges_(std::move(edges_per_step)) {
  if (num_agents < 1) throw std::invalid_argument("network needs at least one agent");
  if (num_steps < 1) throw std::invalid_argument("network needs at least one step");
  if (static_cast<int>(edges_.size()) != num_steps)
    throw std::invalid_argument("edge list count " + std::to_string(edges_.size()) +
                                " does not match step count " + std::to_string(num_steps));
  for (std::size_t t = 0; t < edges_.size(); ++t) {
    auto& es = edges_[t];
    for (auto& e : es) {
      if (e.a < 0 || e.a >= num_agents || e.b < 0 || e.b >= num_agents)
        throw std::out_of_range("agent index out of range in contact at step " +
                                std::to_string(t));
      e = make_contact(e.a, e.b);
    }
    std::sort(es.begin(), es.end());
    auto dup = std::adjacent_find(es.begin(), es.end());
    if (dup != es.end())
      throw std::invalid_argument("duplicate contact (" + std::to_string(dup->a) + ", " +
                                  std::to_string(dup->b) + ") at step " + std::to_string(t));
  }
  build_adjacency();
}

void DynamicNetwork::build_adjacency() {
  offsets_.assign(num_steps_, {});
  adjacent_.assign(num_steps_, {});
  for (int t = 0; t < num_steps_; ++t) {
    std::vector<std::size_t> degree(num_agents_ + 1, 0);
    for (const auto& e : edges_[t]) {
      ++degree[e.a + 1];
      ++degree[e.b + 1];
    }
    for (int n = 0; n < num_agents_; ++n) degree[n + 1] += degree[n];
    std::vector<Agent> adj(degree.back());
    std::vector<std::size_t> fill(degree.begin(), degree.end() - 1);
    for (const auto& e : edges_[t]) {
      adj[fill[e.a]++] = e.b;
      adj[fill[e.b]++] = e.a;
    }
    offsets_[t] = std::move(degree);
    adjacent_[t] = std::move(adj);
  }
}

std::size_t DynamicNetwork::check_step(Step t) const {
  if (t < 0 || t >= num_steps_) throw std::out_of_range("step " + std::to_string(t));
  return static_cast<std::size_t>(t);
}

std::span<const Agent> DynamicNetwork::neighbors(Step t, Agent n) const {
  const auto& off = offsets_[check_step(t)];
  if (n < 0 || n >= num_agents_) throw std::out_of_range("agent " + std::to_string(n));
  return std::span<const Agent>(adjacent_[t]).subspan(off[n], off[n + 1] - off[n]);
}

bool DynamicNetwork::has_edge(Step t, Agent a, Agent b) const {
  if (a == b) return false;
  const auto& es = edges_[check_step(t)];
  return std::binary_search(es.begin(), es.end(), make_contact(a, b));
}

std::size_t DynamicNetwork::num_edges() const {
  std::size_t total = 0;
  for (const auto& es : edges_) total += es.size();
  return total;
}

}  // namespace sisnet
