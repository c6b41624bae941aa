#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gbb::flow {

class NetworkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Tag>
struct Edge {
  std::size_t from = 0;
  std::size_t to = 0;
  std::int64_t capacity = 0;
  std::int64_t cost = 0;
  Tag tag{};
};

// Directed network with integer capacities and costs. Tags let callers map
// edges back to domain objects without positional bookkeeping.
template <class Tag = std::monostate>
class Network {
 public:
  Network(std::size_t nodes, std::size_t source, std::size_t sink) : nodes_(nodes), source_(source), sink_(sink) {}

  std::size_t add_node() { return nodes_++; }

  std::size_t add_edge(std::size_t from, std::size_t to, std::int64_t capacity, std::int64_t cost = 0, Tag tag = {}) {
    edges_.push_back(Edge<Tag>{from, to, capacity, cost, std::move(tag)});
    return edges_.size() - 1;
  }

  std::size_t node_count() const { return nodes_; }
  std::size_t source() const { return source_; }
  std::size_t sink() const { return sink_; }
  const std::vector<Edge<Tag>>& edges() const { return edges_; }
  const Edge<Tag>& edge(std::size_t i) const { return edges_.at(i); }

  void validate() const {
    if (source_ >= nodes_ || sink_ >= nodes_) throw NetworkError("source or sink outside node range");
    if (source_ == sink_) throw NetworkError("source equals sink");
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const auto& e = edges_[i];
      if (e.from >= nodes_ || e.to >= nodes_) throw NetworkError("edge " + std::to_string(i) + " has a dangling node id");
      if (e.from == e.to) throw NetworkError("edge " + std::to_string(i) + " is a self-loop");
      if (e.capacity < 0) throw NetworkError("edge " + std::to_string(i) + " has negative capacity");
    }
  }

  // One line per edge: `from to cap cost tag`.
  void dump(std::ostream& os, const std::function<std::string(const Tag&)>& label = {}) const {
    for (const auto& e : edges_) {
      os << e.from << ' ' << e.to << ' ' << e.capacity << ' ' << e.cost << ' ' << (label ? label(e.tag) : "-") << '\n';
    }
  }

 private:
  std::size_t nodes_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<Edge<Tag>> edges_;
};

struct Flow {
  std::vector<std::int64_t> edge_flow;
  std::int64_t value = 0;
  std::int64_t cost = 0;
};

namespace detail {

// Residual graph: arc 2i is edge i, arc 2i+1 its reverse.
class Residual {
 public:
  template <class Tag>
  explicit Residual(const Network<Tag>& net) : adj_(net.node_count()) {
    net.validate();
    arcs_.reserve(2 * net.edges().size());
    for (const auto& e : net.edges()) {
      adj_[e.from].push_back(arcs_.size());
      arcs_.push_back({e.to, e.capacity, e.cost});
      adj_[e.to].push_back(arcs_.size());
      arcs_.push_back({e.from, 0, -e.cost});
    }
  }

  struct Arc {
    std::size_t to;
    std::int64_t residual;
    std::int64_t cost;
  };

  std::vector<Arc>& arcs() { return arcs_; }
  const std::vector<std::vector<std::size_t>>& adj() const { return adj_; }
  std::size_t tail(std::size_t arc) const { return arcs_[arc ^ 1].to; }

  void push(std::size_t arc, std::int64_t amount) {
    arcs_[arc].residual -= amount;
    arcs_[arc ^ 1].residual += amount;
  }

  template <class Tag>
  Flow extract(const Network<Tag>& net) const {
    Flow f;
    f.edge_flow.resize(net.edges().size());
    for (std::size_t i = 0; i < net.edges().size(); ++i) {
      f.edge_flow[i] = arcs_[2 * i + 1].residual;
      f.cost += f.edge_flow[i] * net.edges()[i].cost;
      if (net.edges()[i].from == net.source()) f.value += f.edge_flow[i];
      if (net.edges()[i].to == net.source()) f.value -= f.edge_flow[i];
    }
    return f;
  }

 private:
  std::vector<Arc> arcs_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

}  // namespace detail

// Edmonds-Karp: BFS shortest augmenting paths, neighbours scanned in edge order.
template <class Tag>
Flow max_flow(const Network<Tag>& net) {
  detail::Residual g(net);
  const std::size_t s = net.source();
  const std::size_t t = net.sink();
  std::vector<std::size_t> parent(net.node_count());
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  while (true) {
    std::fill(parent.begin(), parent.end(), kNone);
    std::deque<std::size_t> queue{s};
    parent[s] = kNone - 1;
    while (!queue.empty() && parent[t] == kNone) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t a : g.adj()[u]) {
        const auto& arc = g.arcs()[a];
        if (arc.residual > 0 && parent[arc.to] == kNone) {
          parent[arc.to] = a;
          queue.push_back(arc.to);
        }
      }
    }
    if (parent[t] == kNone) break;

    std::int64_t bottleneck = detail::kInf;
    for (std::size_t v = t; v != s; v = g.tail(parent[v])) bottleneck = std::min(bottleneck, g.arcs()[parent[v]].residual);
    for (std::size_t v = t; v != s; v = g.tail(parent[v])) g.push(parent[v], bottleneck);
  }
  return g.extract(net);
}

// Successive shortest paths with Johnson potentials. Initial potentials come
// from one relaxation pass in topological order when the network is acyclic,
// otherwise from Bellman-Ford; a negative cycle is rejected.
template <class Tag>
Flow min_cost_max_flow(const Network<Tag>& net) {
  detail::Residual g(net);
  const std::size_t n = net.node_count();
  const std::size_t s = net.source();
  const std::size_t t = net.sink();
  using detail::kInf;

  std::vector<std::int64_t> potential(n, kInf);
  potential[s] = 0;
  {
    std::vector<std::size_t> indegree(n, 0);
    for (const auto& e : net.edges())
      if (e.capacity > 0) ++indegree[e.to];
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t v = 0; v < n; ++v)
      if (indegree[v] == 0) order.push_back(v);
    for (std::size_t i = 0; i < order.size(); ++i)
      for (std::size_t a : g.adj()[order[i]])
        if (a % 2 == 0 && g.arcs()[a].residual > 0 && --indegree[g.arcs()[a].to] == 0) order.push_back(g.arcs()[a].to);

    const auto relax = [&](std::size_t u) {
      bool changed = false;
      if (potential[u] == kInf) return changed;
      for (std::size_t a : g.adj()[u]) {
        const auto& arc = g.arcs()[a];
        if (arc.residual > 0 && potential[u] + arc.cost < potential[arc.to]) {
          potential[arc.to] = potential[u] + arc.cost;
          changed = true;
        }
      }
      return changed;
    };

    if (order.size() == n) {
      for (std::size_t u : order) relax(u);
    } else {
      bool changed = true;
      for (std::size_t round = 0; round < n && changed; ++round) {
        changed = false;
        for (std::size_t u = 0; u < n; ++u) changed = relax(u) || changed;
      }
      if (changed) throw NetworkError("negative-cost cycle reachable from source");
    }
    // Unreachable nodes stay unreachable: reverse arcs only open on used paths.
    for (auto& p : potential)
      if (p == kInf) p = 0;
  }

  std::vector<std::int64_t> dist(n);
  std::vector<std::size_t> parent(n);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  using Item = std::pair<std::int64_t, std::size_t>;

  while (true) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(parent.begin(), parent.end(), kNone);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0;
    heap.emplace(0, s);
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d != dist[u]) continue;
      for (std::size_t a : g.adj()[u]) {
        const auto& arc = g.arcs()[a];
        if (arc.residual <= 0) continue;
        const std::int64_t nd = d + arc.cost + potential[u] - potential[arc.to];
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          parent[arc.to] = a;
          heap.emplace(nd, arc.to);
        }
      }
    }
    if (dist[t] == kInf) break;
    for (std::size_t v = 0; v < n; ++v)
      if (dist[v] < kInf) potential[v] += dist[v];

    std::int64_t bottleneck = kInf;
    for (std::size_t v = t; v != s; v = g.tail(parent[v])) bottleneck = std::min(bottleneck, g.arcs()[parent[v]].residual);
    for (std::size_t v = t; v != s; v = g.tail(parent[v])) g.push(parent[v], bottleneck);
  }
  return g.extract(net);
}

}  // namespace gbb::flow
