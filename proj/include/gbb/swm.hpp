#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iterator>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gbb/flow.hpp"
#include "gbb/model.hpp"

namespace gbb {

class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::string what, std::uint64_t required, std::uint64_t limit)
      : std::runtime_error(std::move(what)), required_(required), limit_(limit) {}
  // Saturates at UINT64_MAX.
  std::uint64_t required() const { return required_; }
  std::uint64_t limit() const { return limit_; }

 private:
  std::uint64_t required_;
  std::uint64_t limit_;
};

// Number of buyers per vendor tuple, indexed by Market cell.
struct Partition {
  std::vector<std::uint32_t> counts;
  friend bool operator==(const Partition&, const Partition&) = default;
};

// binomial(n + cells - 1, cells - 1), saturating at UINT64_MAX.
inline std::uint64_t partition_count(std::uint64_t n, std::uint64_t cells) {
  if (cells == 0) return n == 0 ? 1 : 0;
  const std::uint64_t k = std::min(n, cells - 1);
  const std::uint64_t top = n + cells - 1;
  unsigned __int128 result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (top - k + i) / i;  // exact: product of i consecutive integers / i!
    if (result > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(result);
}

// All compositions of n into `cells` nonnegative parts, starting at
// (n,0,...,0) and ending at (0,...,0,n); e.g. (2,0),(1,1),(0,2).
class PartitionRange {
 public:
  PartitionRange(std::uint32_t n, std::size_t cells) : n_(n), cells_(cells) {
    if (cells == 0) throw std::invalid_argument("partition range needs at least one cell");
  }

  class iterator {
   public:
    using value_type = Partition;
    using difference_type = std::ptrdiff_t;
    using reference = const Partition&;
    using pointer = const Partition*;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    iterator(std::uint32_t n, std::size_t cells) : done_(false) {
      current_.counts.assign(cells, 0);
      current_.counts[0] = n;
    }

    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }

    iterator& operator++() {
      auto& a = current_.counts;
      const std::uint32_t tail = a.back();
      a.back() = 0;
      std::size_t i = a.size() - 1;
      while (i-- > 0) {
        if (a[i] > 0) {
          --a[i];
          a[i + 1] = tail + 1;
          return *this;
        }
      }
      done_ = true;
      return *this;
    }
    void operator++(int) { ++*this; }

    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

   private:
    Partition current_;
    bool done_ = true;
  };

  iterator begin() const { return iterator(n_, cells_); }
  iterator end() const { return iterator(); }

  std::uint64_t size() const { return partition_count(n_, cells_); }

 private:
  std::uint32_t n_;
  std::size_t cells_;
};

inline PartitionRange enumerate_partitions(std::uint32_t n, std::size_t cells) { return PartitionRange(n, cells); }

// ---------------------------------------------------------------------------

struct AssignmentTag {
  enum class Kind { kBuyer, kChoice, kCell } kind = Kind::kBuyer;
  BuyerId buyer;
  std::size_t cell = 0;
};

// Node layout: 0 source, 1 sink, 2.. buyers, then one node per cell.
inline flow::Network<AssignmentTag> assignment_network(const Market& market, const Partition& partition) {
  const std::size_t n = market.buyer_count();
  const std::size_t cells = market.cell_count();
  if (partition.counts.size() != cells) throw ModelError("partition does not match the market's tuple space");
  flow::Network<AssignmentTag> net(2 + n + cells, 0, 1);
  for (std::uint32_t b = 0; b < n; ++b) net.add_edge(0, 2 + b, 1, 0, {AssignmentTag::Kind::kBuyer, BuyerId{b}, 0});
  for (std::uint32_t b = 0; b < n; ++b) {
    for (std::size_t cell = 0; cell < cells; ++cell) {
      const Money v = market.valuation(BuyerId{b}, market.tuple_of_cell(cell));
      net.add_edge(2 + b, 2 + n + cell, 1, -v.value(), {AssignmentTag::Kind::kChoice, BuyerId{b}, cell});
    }
  }
  for (std::size_t cell = 0; cell < cells; ++cell)
    net.add_edge(2 + n + cell, 1, partition.counts[cell], 0, {AssignmentTag::Kind::kCell, BuyerId{}, cell});
  return net;
}

// Total market price implied by a partition alone.
inline Money total_price(const Market& market, const Partition& partition) {
  const std::size_t cells = market.cell_count();
  std::vector<DemandVector> demand(market.vendor_count(), DemandVector(market.item_types, 0));
  std::vector<VendorTuple> tuples(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    tuples[cell] = market.tuple_of_cell(cell);
    for (std::size_t k = 0; k < market.item_types; ++k) demand[tuples[cell][k].index][k] += partition.counts.at(cell);
  }
  const auto tiers = triggered(market, demand);
  Money total{0};
  for (std::size_t cell = 0; cell < cells; ++cell)
    if (partition.counts[cell] > 0) total += tuple_market_price(market, tiers, tuples[cell]) * partition.counts[cell];
  return total;
}

struct PartitionSolution {
  Allocation allocation;
  Money welfare;
};

inline PartitionSolution best_allocation_for_partition(const Market& market, const Partition& partition) {
  const auto net = assignment_network(market, partition);
  const flow::Flow f = flow::min_cost_max_flow(net);
  if (f.value != static_cast<std::int64_t>(market.buyer_count()))
    throw std::logic_error("assignment network did not route every buyer (flow " + std::to_string(f.value) + ")");

  PartitionSolution out{Allocation{std::vector<VendorTuple>(market.buyer_count())}, Money{0}};
  for (std::size_t i = 0; i < net.edges().size(); ++i) {
    const auto& e = net.edges()[i];
    if (e.tag.kind == AssignmentTag::Kind::kChoice && f.edge_flow[i] == 1)
      out.allocation.choice[e.tag.buyer.index] = market.tuple_of_cell(e.tag.cell);
  }
  out.welfare = Money{-f.cost} - total_price(market, partition);
  return out;
}

struct SwmOptions {
  std::uint64_t max_partitions = 5'000'000;
  unsigned jobs = 1;
  // Called with (evaluated, total) after each batch.
  std::function<void(std::uint64_t, std::uint64_t)> progress;
};

struct SwmResult {
  Allocation allocation;
  Money welfare;
  Partition partition;
  std::uint64_t partition_count = 0;
  std::uint64_t evaluated = 0;
};

// Maximizes welfare over all partitions; ties keep the earliest partition in
// enumeration order.
inline SwmResult solve_swm(const Market& market, const SwmOptions& options = {}) {
  const std::size_t cells = market.cell_count();
  const std::uint64_t total = partition_count(market.buyer_count(), cells);
  if (total > options.max_partitions)
    throw BudgetExceeded("partition count " + std::to_string(total) + " exceeds cap " + std::to_string(options.max_partitions),
                         total, options.max_partitions);

  SwmResult best;
  best.partition_count = total;
  bool have = false;
  const unsigned jobs = std::max(1u, options.jobs);
  const std::size_t batch_size = jobs == 1 ? 1 : 1024 * jobs;

  std::vector<Partition> batch;
  std::vector<std::optional<PartitionSolution>> results;
  const auto flush = [&]() {
    results.assign(batch.size(), std::nullopt);
    if (jobs == 1 || batch.size() < 2) {
      for (std::size_t i = 0; i < batch.size(); ++i) results[i] = best_allocation_for_partition(market, batch[i]);
    } else {
      std::vector<std::thread> workers;
      for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w]() {
          for (std::size_t i = w; i < batch.size(); i += jobs) results[i] = best_allocation_for_partition(market, batch[i]);
        });
      }
      for (auto& t : workers) t.join();
    }
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (!have || results[i]->welfare > best.welfare) {
        best.allocation = std::move(results[i]->allocation);
        best.welfare = results[i]->welfare;
        best.partition = batch[i];
        have = true;
      }
    }
    best.evaluated += batch.size();
    batch.clear();
    if (options.progress) options.progress(best.evaluated, total);
  };

  for (const Partition& p : enumerate_partitions(static_cast<std::uint32_t>(market.buyer_count()), cells)) {
    batch.push_back(p);
    if (batch.size() >= batch_size) flush();
  }
  if (!batch.empty()) flush();
  return best;
}

// Exhaustive search over all (M+1)^(cN) allocations. Test oracle.
inline SwmResult brute_force_swm(const Market& market, std::uint64_t max_allocations = 1'000'000) {
  const std::size_t cells = market.cell_count();
  const std::size_t n = market.buyer_count();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (__builtin_mul_overflow(total, static_cast<std::uint64_t>(cells), &total)) {
      total = std::numeric_limits<std::uint64_t>::max();
      break;
    }
  }
  if (total > max_allocations)
    throw BudgetExceeded("allocation count " + std::to_string(total) + " exceeds cap " + std::to_string(max_allocations),
                         total, max_allocations);

  std::vector<VendorTuple> tuples(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) tuples[cell] = market.tuple_of_cell(cell);

  std::vector<std::size_t> digits(n, 0);
  Allocation alloc{std::vector<VendorTuple>(n, tuples[0])};
  SwmResult best;
  best.evaluated = 0;
  best.partition_count = partition_count(n, cells);
  bool have = false;
  while (true) {
    const Money sw = social_welfare(market, alloc);
    ++best.evaluated;
    if (!have || sw > best.welfare) {
      best.allocation = alloc;
      best.welfare = sw;
      have = true;
    }
    std::size_t pos = n;
    while (pos > 0 && digits[pos - 1] + 1 == cells) {
      digits[pos - 1] = 0;
      alloc.choice[pos - 1] = tuples[0];
      --pos;
    }
    if (pos == 0) break;
    alloc.choice[pos - 1] = tuples[++digits[pos - 1]];
  }
  best.partition.counts.assign(cells, 0);
  for (const auto& t : best.allocation.choice) ++best.partition.counts[market.cell_of(t)];
  return best;
}

}  // namespace gbb
