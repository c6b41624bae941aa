#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gbb/flow.hpp"
#include "gbb/model.hpp"
#include "gbb/rational.hpp"

namespace gbb {

class Unstabilizable : public std::runtime_error {
 public:
  Unstabilizable(std::string what, VendorSet group, Money deficit)
      : std::runtime_error(std::move(what)), group_(std::move(group)), deficit_(deficit) {}
  const VendorSet& group() const { return group_; }
  Money deficit() const { return deficit_; }

 private:
  VendorSet group_;
  Money deficit_;
};

class SumMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonZeroSum : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Group transfers t(s, x): money paid by P+(s) to N-(x). Zero entries are not stored.
class GroupTransfers {
 public:
  using Key = std::pair<VendorId, VendorSet>;

  Money at(VendorId s, const VendorSet& x) const {
    const auto it = entries_.find({s, x});
    return it == entries_.end() ? Money{0} : it->second;
  }
  void set(VendorId s, const VendorSet& x, Money amount) {
    if (amount < Money{0}) throw std::invalid_argument("group transfer must be nonnegative");
    if (amount == Money{0})
      entries_.erase({s, x});
    else
      entries_[{s, x}] = amount;
  }
  void add(VendorId s, const VendorSet& x, Money amount) { set(s, x, at(s, x) + amount); }

  const std::map<Key, Money>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // Total paid by P+(s) / received by N-(x).
  Money paid_by(VendorId s) const {
    Money t{0};
    for (const auto& [key, v] : entries_)
      if (key.first == s) t += v;
    return t;
  }
  Money received_by(const VendorSet& x) const {
    Money t{0};
    for (const auto& [key, v] : entries_)
      if (key.second == x) t += v;
    return t;
  }

  friend bool operator==(const GroupTransfers&, const GroupTransfers&) = default;

 private:
  std::map<Key, Money> entries_;
};

inline bool contains(const VendorSet& x, VendorId s) { return std::binary_search(x.begin(), x.end(), s); }

// Buyer-to-buyer transfers t(b, b'), stored payer -> payee with positive amounts.
class TransferMatrix {
 public:
  using Key = std::pair<BuyerId, BuyerId>;

  void add(BuyerId payer, BuyerId payee, const Rational& amount) {
    if (payer == payee) throw std::invalid_argument("transfer from a buyer to itself");
    if (amount.sign() < 0) throw std::invalid_argument("transfer amount must be nonnegative");
    if (amount.sign() == 0) return;
    auto [it, inserted] = entries_.try_emplace({payer, payee}, amount);
    if (!inserted) it->second += amount;
  }
  void merge(const TransferMatrix& other) {
    for (const auto& [key, v] : other.entries_) add(key.first, key.second, v);
  }

  Rational at(BuyerId payer, BuyerId payee) const {
    const auto it = entries_.find({payer, payee});
    return it == entries_.end() ? Rational{0} : it->second;
  }
  const std::map<Key, Rational>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Net outflow: paid minus received.
  Rational net_outflow(BuyerId b) const {
    Rational net{0};
    for (const auto& [key, v] : entries_) {
      if (key.first == b) net += v;
      if (key.second == b) net -= v;
    }
    return net;
  }
  std::vector<Rational> net_outflows(std::size_t buyers) const {
    std::vector<Rational> net(buyers, Rational{0});
    for (const auto& [key, v] : entries_) {
      net.at(key.first.index) += v;
      net.at(key.second.index) -= v;
    }
    return net;
  }

  friend bool operator==(const TransferMatrix&, const TransferMatrix&) = default;

 private:
  std::map<Key, Rational> entries_;
};

struct BuyerPrice {
  Money market_price;
  Rational delta;
  Rational final_price;
};

struct PriceVector {
  std::vector<BuyerPrice> buyers;
};

// ---------------------------------------------------------------------------
// Step 1: group transfers by max flow

struct TransferTag {
  enum class Kind { kDemand, kCover, kBudget } kind = Kind::kDemand;
  VendorId vendor;
  VendorSet group;
};

// Node layout: 0 source r, 1 sink t, then u_s per vendor, then v_x per nonempty N-(x).
inline flow::Network<TransferTag> group_transfer_network(const Market& market, const GroupPartition& gp) {
  const std::size_t vendors = market.vendor_count();
  flow::Network<TransferTag> net(2 + vendors + gp.negative.size(), 0, 1);
  std::size_t vx = 2 + vendors;
  for (const auto& [x, group] : gp.negative) {
    net.add_edge(0, vx, group.total.value(), 0, {TransferTag::Kind::kDemand, VendorId{}, x});
    for (VendorId s : x) net.add_edge(vx, 2 + s.index, group.total.value(), 0, {TransferTag::Kind::kCover, s, x});
    ++vx;
  }
  for (std::uint32_t s = 0; s < vendors; ++s)
    net.add_edge(2 + s, 1, gp.available(VendorId{s}).value(), 0, {TransferTag::Kind::kBudget, VendorId{s}, {}});
  return net;
}

// The flow-to-transfer map: t(s, x) is the flow on v_x -> u_s.
inline GroupTransfers group_transfers_from_flow(const flow::Network<TransferTag>& net, const flow::Flow& f) {
  GroupTransfers gt;
  for (std::size_t i = 0; i < net.edges().size(); ++i) {
    const auto& e = net.edges()[i];
    if (e.tag.kind == TransferTag::Kind::kCover && f.edge_flow[i] > 0)
      gt.add(e.tag.vendor, e.tag.group, Money{f.edge_flow[i]});
  }
  return gt;
}

// Inverse map; throws if gt uses a pair with no v_x -> u_s edge (a cross-transfer).
inline flow::Flow flow_from_group_transfers(const flow::Network<TransferTag>& net, const GroupTransfers& gt) {
  flow::Flow f;
  f.edge_flow.assign(net.edges().size(), 0);
  std::size_t matched = 0;
  for (std::size_t i = 0; i < net.edges().size(); ++i) {
    const auto& e = net.edges()[i];
    switch (e.tag.kind) {
      case TransferTag::Kind::kDemand:
        f.edge_flow[i] = gt.received_by(e.tag.group).value();
        f.value += f.edge_flow[i];
        break;
      case TransferTag::Kind::kCover:
        f.edge_flow[i] = gt.at(e.tag.vendor, e.tag.group).value();
        if (f.edge_flow[i] > 0) ++matched;
        break;
      case TransferTag::Kind::kBudget:
        f.edge_flow[i] = gt.paid_by(e.tag.vendor).value();
        break;
    }
  }
  if (matched != gt.entries().size()) throw std::invalid_argument("group transfers contain pairs absent from the network");
  return f;
}

struct GroupTransferSolution {
  flow::Network<TransferTag> network;
  flow::Flow flow;
  GroupTransfers transfers;
  Money required;  // total subsidy needed, sum of tau(x)
};

inline GroupTransferSolution max_group_transfer_flow(const Market& market, const GroupPartition& gp) {
  auto net = group_transfer_network(market, gp);
  auto f = flow::max_flow(net);
  auto gt = group_transfers_from_flow(net, f);
  return {std::move(net), std::move(f), std::move(gt), gp.total_needed()};
}

// Rational and stabilizing group transfers; throws Unstabilizable naming the
// first group whose subsidy the flow could not cover.
inline GroupTransfers solve_group_transfers(const Market& market, const GroupPartition& gp) {
  auto sol = max_group_transfer_flow(market, gp);
  for (std::size_t i = 0; i < sol.network.edges().size(); ++i) {
    const auto& e = sol.network.edges()[i];
    if (e.tag.kind == TransferTag::Kind::kDemand && sol.flow.edge_flow[i] < e.capacity) {
      const Money deficit{e.capacity - sol.flow.edge_flow[i]};
      throw Unstabilizable("group " + market.set_name(e.tag.group) + " short of subsidy by " + to_string(deficit), e.tag.group,
                           deficit);
    }
  }
  return std::move(sol.transfers);
}

inline GroupTransfers solve_group_transfers(const Market& market, const Allocation& alloc) {
  return solve_group_transfers(market, group_partition(market, alloc));
}

// ---------------------------------------------------------------------------
// Step 2: buyer-level transfers

using Amount = std::pair<BuyerId, Rational>;

// Two-pointer matching: each offer is spent in order until every request is met.
inline TransferMatrix greedy_match(std::span<const Amount> offers, std::span<const Amount> requests) {
  Rational offered{0}, requested{0};
  for (const auto& [b, v] : offers) {
    if (v.sign() < 0) throw std::invalid_argument("negative offer");
    offered += v;
  }
  for (const auto& [b, v] : requests) {
    if (v.sign() < 0) throw std::invalid_argument("negative request");
    requested += v;
  }
  if (offered != requested) throw SumMismatch("offers total " + offered.str() + " but requests total " + requested.str());

  TransferMatrix t;
  std::size_t i = 0;
  std::size_t l = 0;
  Rational x = offers.empty() ? Rational{0} : offers[0].second;
  Rational y = requests.empty() ? Rational{0} : requests[0].second;
  while (l < requests.size()) {
    if (y.sign() == 0) {
      if (++l < requests.size()) y = requests[l].second;
      continue;
    }
    if (x >= y) {
      t.add(offers[i].first, requests[l].first, y);
      x -= y;
      if (++l < requests.size()) y = requests[l].second;
    } else {
      t.add(offers[i].first, requests[l].first, x);
      y -= x;
      x = offers[++i].second;  // in range: offers still cover y > 0
    }
  }
  return t;
}

// Splits each P+(s)'s group transfers among its members in proportion to
// surplus. Phases run over x in canonical order; buyers in id order.
inline TransferMatrix fair_buyer_transfers(const GroupPartition& gp, const GroupTransfers& gt) {
  TransferMatrix out;
  for (const auto& [s, payers] : gp.positive) {
    std::vector<Rational> residual;
    residual.reserve(payers.members.size());
    for (BuyerId b : payers.members) residual.emplace_back(gp.surplus[b.index]);

    for (const auto& [key, amount] : gt.entries()) {
      if (key.first != s) continue;
      const VendorSet& x = key.second;
      const auto group = gp.negative.find(x);
      if (group == gp.negative.end())
        throw SumMismatch("group transfer to " + std::to_string(x.size()) + "-vendor group with no subsidized buyers");

      Rational pool{0};
      for (const auto& r : residual) pool += r;
      if (pool.sign() == 0) throw SumMismatch("vendor group has no residual surplus left to pay");
      const Rational alpha = Rational(amount) / pool;
      const Rational beta = Rational(amount) / Rational(group->second.total);

      std::vector<Amount> offers;
      for (std::size_t i = 0; i < payers.members.size(); ++i) offers.emplace_back(payers.members[i], alpha * residual[i]);
      std::vector<Amount> requests;
      for (BuyerId b : group->second.members) requests.emplace_back(b, -(beta * Rational(gp.surplus[b.index])));

      out.merge(greedy_match(offers, requests));
      for (auto& r : residual) r *= Rational{1} - alpha;
    }
  }
  return out;
}

inline PriceVector prices_from_transfers(const Market& market, const Allocation& alloc, const TransferMatrix& t) {
  const auto summary = summarize(market, alloc);
  const auto deltas = t.net_outflows(market.buyer_count());
  PriceVector p;
  Rational balance{0};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) {
    p.buyers.push_back({summary.market_price[b], deltas[b], Rational(summary.market_price[b]) + deltas[b]});
    balance += deltas[b];
  }
  if (balance.sign() != 0) throw std::logic_error("transfer matrix is not budget balanced");
  return p;
}

// Builds transfers whose net outflows equal the given deltas: the last
// subsidized buyer is served from the tail of the payer list, the boundary
// payer keeping any remainder.
inline TransferMatrix transfers_from_price_deltas(std::span<const Rational> deltas) {
  Rational sum{0};
  for (const auto& d : deltas) sum += d;
  if (sum.sign() != 0) throw NonZeroSum("price deltas sum to " + sum.str());

  std::vector<Amount> payers;
  std::vector<Amount> payees;
  for (std::uint32_t b = 0; b < deltas.size(); ++b) {
    if (deltas[b].sign() > 0) payers.emplace_back(BuyerId{b}, deltas[b]);
    if (deltas[b].sign() < 0) payees.emplace_back(BuyerId{b}, -deltas[b]);
  }

  TransferMatrix t;
  while (!payees.empty()) {
    auto [payee, need] = payees.back();
    payees.pop_back();
    // k = max{j : sum_{i>=j} payers[i] >= need}
    Rational tail{0};
    std::size_t k = payers.size();
    while (k > 0 && tail < need) tail += payers[--k].second;
    for (std::size_t i = k + 1; i < payers.size(); ++i) {
      t.add(payers[i].first, payee, payers[i].second);
      need -= payers[i].second;
    }
    t.add(payers[k].first, payee, need);
    payers[k].second -= need;
    payers.resize(payers[k].second.sign() == 0 ? k : k + 1);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Cross-transfers

struct CrossTransferGraph {
  std::set<std::pair<VendorId, VendorId>> edges;
  bool empty() const { return edges.empty(); }
};

// Edge (s, s') iff some x has s not in x, s' in x, and t(s, x) > 0.
inline CrossTransferGraph cross_transfer_graph(const GroupTransfers& gt) {
  CrossTransferGraph g;
  for (const auto& [key, amount] : gt.entries()) {
    const auto& [s, x] = key;
    if (amount <= Money{0} || contains(x, s)) continue;
    for (VendorId target : x) g.edges.insert({s, target});
  }
  return g;
}

namespace detail {

// Shortest directed cycle, written from its smallest node; among cycles of
// equal length the lexicographically smallest node sequence.
inline std::optional<std::vector<VendorId>> shortest_cycle(const CrossTransferGraph& g) {
  std::map<VendorId, std::vector<VendorId>> adj;  // sorted: edges come from a std::set
  std::set<VendorId> nodes;
  for (const auto& [a, b] : g.edges) {
    adj[a].push_back(b);
    nodes.insert(a);
    nodes.insert(b);
  }

  // Length of the shortest cycle whose smallest node is `start`.
  const auto cycle_length = [&](VendorId start) -> std::optional<std::size_t> {
    std::map<VendorId, std::size_t> dist{{start, 0}};
    std::vector<VendorId> frontier{start};
    while (!frontier.empty()) {
      std::vector<VendorId> next;
      for (VendorId u : frontier) {
        for (VendorId v : adj[u]) {
          if (v == start) return dist[u] + 1;
          if (v > start && dist.emplace(v, dist[u] + 1).second) next.push_back(v);
        }
      }
      frontier = std::move(next);
    }
    return std::nullopt;
  };

  std::optional<std::size_t> length;
  for (VendorId start : nodes) {
    const auto l = cycle_length(start);
    if (l && (!length || *l < *length)) length = l;
  }
  if (!length) return std::nullopt;

  std::vector<VendorId> path;
  const auto extend = [&](const auto& self, VendorId start) -> bool {
    const VendorId u = path.back();
    if (path.size() == *length) return std::binary_search(adj[u].begin(), adj[u].end(), start);
    for (VendorId v : adj[u]) {
      if (v <= start || std::find(path.begin(), path.end(), v) != path.end()) continue;
      path.push_back(v);
      if (self(self, start)) return true;
      path.pop_back();
    }
    return false;
  };
  for (VendorId start : nodes) {
    path.assign(1, start);
    if (extend(extend, start)) return path;
  }
  return std::nullopt;
}

}  // namespace detail

// Rewrites group transfers into an equivalent set whose cross-transfer graph
// is acyclic. Each step breaks a shortest cycle s1 -> s2 -> ... -> sK -> s1,
// relabelled so s1 carries the least cross-transfer along the cycle.
inline GroupTransfers eliminate_cycles(GroupTransfers gt) {
  while (true) {
    const auto cycle = detail::shortest_cycle(cross_transfer_graph(gt));
    if (!cycle) return gt;
    const std::size_t k = cycle->size();

    // X_i: groups x with s_i not in x, s_{i+1} in x, t(s_i, x) > 0.
    const auto crossing = [&](std::size_t i) {
      const VendorId from = (*cycle)[i];
      const VendorId to = (*cycle)[(i + 1) % k];
      std::vector<std::pair<VendorSet, Money>> xs;
      for (const auto& [key, amount] : gt.entries())
        if (key.first == from && !contains(key.second, from) && contains(key.second, to)) xs.emplace_back(key.second, amount);
      return xs;
    };
    const auto total = [](const std::vector<std::pair<VendorSet, Money>>& xs) {
      Money t{0};
      for (const auto& [x, v] : xs) t += v;
      return t;
    };

    std::size_t first = 0;
    Money least = total(crossing(0));
    for (std::size_t i = 1; i < k; ++i) {
      const Money ti = total(crossing(i));
      if (ti < least) {
        least = ti;
        first = i;
      }
    }
    const std::size_t last = (first + k - 1) % k;  // s_K, the predecessor of s_1
    const VendorId s1 = (*cycle)[first];
    const VendorId sk = (*cycle)[last];
    const auto x1 = crossing(first);
    const auto xk = crossing(last);

    // s_K takes over s_1's cross-transfers to X_1 ...
    for (const auto& [x, v] : x1) {
      gt.set(s1, x, Money{0});
      gt.add(sk, x, v);
    }
    // ... and s_1 takes the same amount off s_K's transfers to X_K, where s_1 is a member.
    Money remaining = least;
    for (const auto& [x, v] : xk) {
      if (remaining == Money{0}) break;
      const Money moved = std::min(remaining, v);
      gt.add(s1, x, moved);
      gt.set(sk, x, gt.at(sk, x) - moved);
      remaining -= moved;
    }
    if (remaining != Money{0}) throw std::logic_error("cycle elimination could not redistribute the cross-transfer");
  }
}

// Same, after checking that gt stays within each P+(s) budget and covers each N-(x) exactly.
inline GroupTransfers eliminate_cycles(const GroupTransfers& gt, const GroupPartition& gp) {
  for (const auto& [s, g] : gp.positive)
    if (gt.paid_by(s) > g.total) throw SumMismatch("group transfers exceed a vendor group's surplus");
  for (const auto& [x, g] : gp.negative)
    if (gt.received_by(x) != g.total) throw SumMismatch("group transfers do not cover a subsidized group exactly");
  return eliminate_cycles(gt);
}

}  // namespace gbb
