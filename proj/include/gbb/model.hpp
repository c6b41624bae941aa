#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gbb/money.hpp"

namespace gbb {

struct VendorId {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(VendorId, VendorId) = default;
};

struct BuyerId {
  std::uint32_t index = 0;
  friend constexpr auto operator<=>(BuyerId, BuyerId) = default;
};

inline constexpr VendorId kNullVendor{0};
inline constexpr const char* kNullVendorName = "none";

// One vendor per item type, in item-type order.
using VendorTuple = std::vector<VendorId>;
// Sorted, duplicate-free list of vendors.
using VendorSet = std::vector<VendorId>;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiscountTier {
  std::vector<std::int64_t> thresholds;
  Money bundle_price;
  friend bool operator==(const DiscountTier&, const DiscountTier&) = default;
};

struct Vendor {
  std::string name;
  std::vector<Money> base_prices;
  std::vector<DiscountTier> tiers;

  Money bundle_base_price() const {
    Money total{0};
    for (Money p : base_prices) total += p;
    return total;
  }
  friend bool operator==(const Vendor&, const Vendor&) = default;
};

struct Buyer {
  std::string name;
  // Absent tuples are worth zero.
  std::map<VendorTuple, Money> valuations;
  friend bool operator==(const Buyer&, const Buyer&) = default;
};

// A group-buying market. vendors[0] is always the null vendor ("do not buy"),
// with zero base prices and no reachable discount.
struct Market {
  std::size_t item_types = 1;
  std::vector<Vendor> vendors;
  std::vector<Buyer> buyers;

  static Market with_items(std::size_t item_types) {
    Market m;
    m.item_types = item_types;
    m.vendors.push_back(Vendor{kNullVendorName, std::vector<Money>(item_types, Money{0}), {}});
    return m;
  }

  VendorId add_vendor(std::string name, std::vector<Money> base_prices, std::vector<DiscountTier> tiers = {}) {
    vendors.push_back(Vendor{std::move(name), std::move(base_prices), std::move(tiers)});
    return VendorId{static_cast<std::uint32_t>(vendors.size() - 1)};
  }

  BuyerId add_buyer(std::string name, std::map<VendorTuple, Money> valuations = {}) {
    buyers.push_back(Buyer{std::move(name), std::move(valuations)});
    return BuyerId{static_cast<std::uint32_t>(buyers.size() - 1)};
  }

  std::size_t vendor_count() const { return vendors.size(); }
  std::size_t buyer_count() const { return buyers.size(); }

  const Vendor& vendor(VendorId s) const {
    if (s.index >= vendors.size()) throw ModelError("unknown vendor index " + std::to_string(s.index));
    return vendors[s.index];
  }
  const Buyer& buyer(BuyerId b) const {
    if (b.index >= buyers.size()) throw ModelError("unknown buyer index " + std::to_string(b.index));
    return buyers[b.index];
  }

  std::optional<VendorId> find_vendor(const std::string& name) const {
    for (std::size_t i = 0; i < vendors.size(); ++i)
      if (vendors[i].name == name) return VendorId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }
  std::optional<BuyerId> find_buyer(const std::string& name) const {
    for (std::size_t i = 0; i < buyers.size(); ++i)
      if (buyers[i].name == name) return BuyerId{static_cast<std::uint32_t>(i)};
    return std::nullopt;
  }

  // Number of vendor tuples, (M+1)^c with the null vendor counted.
  std::size_t cell_count() const {
    std::size_t cells = 1;
    for (std::size_t k = 0; k < item_types; ++k) {
      if (__builtin_mul_overflow(cells, vendors.size(), &cells)) throw ModelError("tuple space overflows size_t");
    }
    return cells;
  }

  // Cells are numbered in lexicographic tuple order, item type 0 most significant.
  VendorTuple tuple_of_cell(std::size_t cell) const {
    VendorTuple t(item_types);
    for (std::size_t k = item_types; k-- > 0;) {
      t[k] = VendorId{static_cast<std::uint32_t>(cell % vendors.size())};
      cell /= vendors.size();
    }
    return t;
  }
  std::size_t cell_of(const VendorTuple& t) const {
    std::size_t cell = 0;
    for (VendorId s : t) cell = cell * vendors.size() + s.index;
    return cell;
  }

  Money valuation(BuyerId b, const VendorTuple& t) const {
    const auto& vals = buyer(b).valuations;
    const auto it = vals.find(t);
    return it == vals.end() ? Money{0} : it->second;
  }

  // Price of a tuple at base prices (the deviation price).
  Money base_price(const VendorTuple& t) const {
    Money total{0};
    for (std::size_t k = 0; k < t.size(); ++k) total += vendor(t[k]).base_prices.at(k);
    return total;
  }

  std::string tuple_name(const VendorTuple& t) const {
    std::string out = "(";
    for (std::size_t k = 0; k < t.size(); ++k) out += (k ? "," : "") + vendor(t[k]).name;
    return out + ")";
  }
  std::string set_name(const VendorSet& x) const {
    std::string out = "{";
    for (std::size_t k = 0; k < x.size(); ++k) out += (k ? "," : "") + vendor(x[k]).name;
    return out + "}";
  }

  friend bool operator==(const Market&, const Market&) = default;
};

// choice[b] is the tuple buyer b purchases.
struct Allocation {
  std::vector<VendorTuple> choice;

  const VendorTuple& operator[](BuyerId b) const { return choice.at(b.index); }
  friend bool operator==(const Allocation&, const Allocation&) = default;
};

inline Allocation uniform_allocation(const Market& market, const VendorTuple& t) {
  return Allocation{std::vector<VendorTuple>(market.buyer_count(), t)};
}

inline VendorTuple full_bundle(const Market& market, VendorId s) { return VendorTuple(market.item_types, s); }

// The vendor b buys every item type from, if any.
inline std::optional<VendorId> single_vendor(const VendorTuple& t) {
  if (t.empty() || std::any_of(t.begin(), t.end(), [&](VendorId s) { return s != t.front(); })) return std::nullopt;
  return t.front();
}

inline VendorSet vendor_set(const VendorTuple& t) {
  VendorSet x(t.begin(), t.end());
  std::sort(x.begin(), x.end());
  x.erase(std::unique(x.begin(), x.end()), x.end());
  return x;
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_market(const Market& market) {
  ValidationReport report;
  auto fail = [&](std::string msg) { report.violations.push_back(std::move(msg)); };
  const std::size_t c = market.item_types;

  if (c == 0) fail("item type count must be at least 1");
  if (market.vendors.empty() || market.vendors.front().name != kNullVendorName) {
    fail("null vendor missing at index 0");
    return report;
  }
  const Vendor& null_vendor = market.vendors.front();
  if (!null_vendor.tiers.empty()) fail("null vendor must not have discount tiers");
  if (std::any_of(null_vendor.base_prices.begin(), null_vendor.base_prices.end(), [](Money p) { return p != Money{0}; }))
    fail("null vendor must have zero base prices");

  std::set<std::string> vendor_names;
  for (const Vendor& v : market.vendors) {
    if (!vendor_names.insert(v.name).second) fail("duplicate vendor id '" + v.name + "'");
    if (v.base_prices.size() != c) {
      fail("vendor '" + v.name + "': expected " + std::to_string(c) + " base prices, got " +
           std::to_string(v.base_prices.size()));
      continue;
    }
    for (Money p : v.base_prices)
      if (p < Money{0}) fail("vendor '" + v.name + "': negative base price " + to_string(p));
    const Money base_sum = v.bundle_base_price();
    std::int64_t prev_sum = 0;
    std::vector<std::int64_t> prev(c, 0);
    Money prev_price = base_sum;
    for (std::size_t i = 0; i < v.tiers.size(); ++i) {
      const DiscountTier& tier = v.tiers[i];
      const std::string where = "vendor '" + v.name + "' tier " + std::to_string(i + 1);
      if (tier.thresholds.size() != c) {
        fail(where + ": threshold arity " + std::to_string(tier.thresholds.size()) + " != " + std::to_string(c));
        continue;
      }
      std::int64_t sum = 0;
      for (std::size_t k = 0; k < c; ++k) {
        if (tier.thresholds[k] < 0) fail(where + ": negative threshold");
        if (tier.thresholds[k] < prev[k]) fail(where + ": thresholds not componentwise nondecreasing");
        sum += tier.thresholds[k];
      }
      if (sum <= prev_sum) fail(where + ": threshold sum not strictly increasing");
      if (tier.bundle_price < Money{0}) fail(where + ": negative bundle price");
      if (i > 0 && tier.bundle_price >= prev_price) fail(where + ": bundle prices not strictly decreasing");
      if (tier.bundle_price >= base_sum)
        fail(where + ": bundle price " + to_string(tier.bundle_price) + " not below base sum " + to_string(base_sum));
      prev = tier.thresholds;
      prev_sum = sum;
      prev_price = tier.bundle_price;
    }
  }

  std::set<std::string> buyer_names;
  for (const Buyer& b : market.buyers) {
    if (!buyer_names.insert(b.name).second) fail("duplicate buyer id '" + b.name + "'");
    for (const auto& [t, value] : b.valuations) {
      if (t.size() != c) {
        fail("buyer '" + b.name + "': valuation tuple of arity " + std::to_string(t.size()));
        continue;
      }
      if (std::any_of(t.begin(), t.end(), [&](VendorId s) { return s.index >= market.vendors.size(); })) {
        fail("buyer '" + b.name + "': valuation references unknown vendor");
        continue;
      }
      if (value < Money{0}) fail("buyer '" + b.name + "': negative valuation for " + market.tuple_name(t));
      if (single_vendor(t) == kNullVendor && value != Money{0})
        fail("buyer '" + b.name + "': all-null tuple must be valued 0");
    }
  }
  return report;
}

inline void check_allocation(const Market& market, const Allocation& alloc) {
  if (alloc.choice.size() != market.buyer_count())
    throw ModelError("allocation covers " + std::to_string(alloc.choice.size()) + " buyers, market has " +
                     std::to_string(market.buyer_count()));
  for (std::size_t b = 0; b < alloc.choice.size(); ++b) {
    const VendorTuple& t = alloc.choice[b];
    if (t.size() != market.item_types) throw ModelError("allocation tuple of buyer " + std::to_string(b) + " has wrong arity");
    for (VendorId s : t)
      if (s.index >= market.vendor_count()) throw ModelError("allocation references unknown vendor " + std::to_string(s.index));
  }
}

// ---------------------------------------------------------------------------
// Demand, discounts and market prices

using DemandVector = std::vector<std::int64_t>;

// demand[s][k] = number of buyers purchasing item k from vendor s.
inline std::vector<DemandVector> demand_vectors(const Market& market, const Allocation& alloc) {
  check_allocation(market, alloc);
  std::vector<DemandVector> demand(market.vendor_count(), DemandVector(market.item_types, 0));
  for (const VendorTuple& t : alloc.choice)
    for (std::size_t k = 0; k < t.size(); ++k) ++demand[t[k].index][k];
  return demand;
}

// Largest tier whose thresholds are met componentwise; 0 when none is.
inline std::size_t triggered_tier(const Vendor& vendor, const DemandVector& demand) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < vendor.tiers.size(); ++i) {
    const auto& thr = vendor.tiers[i].thresholds;
    bool met = true;
    for (std::size_t k = 0; k < thr.size() && met; ++k) met = demand[k] >= thr[k];
    if (met) best = i + 1;
  }
  return best;
}

inline std::vector<std::size_t> triggered(const Market& market, const std::vector<DemandVector>& demand) {
  std::vector<std::size_t> tiers(market.vendor_count(), 0);
  for (std::size_t s = 0; s < market.vendor_count(); ++s) tiers[s] = triggered_tier(market.vendors[s], demand[s]);
  return tiers;
}

inline std::vector<std::size_t> triggered(const Market& market, const Allocation& alloc) {
  return triggered(market, demand_vectors(market, alloc));
}

// Price of a tuple given each vendor's triggered tier.
inline Money tuple_market_price(const Market& market, const std::vector<std::size_t>& tiers, const VendorTuple& t) {
  if (const auto s = single_vendor(t); s && tiers[s->index] > 0)
    return market.vendors[s->index].tiers[tiers[s->index] - 1].bundle_price;
  return market.base_price(t);
}

inline Money buyer_market_price(const Market& market, const Allocation& alloc, BuyerId b) {
  return tuple_market_price(market, triggered(market, alloc), alloc[b]);
}

inline Money utility(const Market& market, const Allocation& alloc, BuyerId b) {
  return market.valuation(b, alloc[b]) - buyer_market_price(market, alloc, b);
}

struct BestAlternative {
  VendorTuple choice;
  Money utility;
};

// Best deviation at base prices; ties go to the lexicographically smallest tuple.
inline BestAlternative best_alternative(const Market& market, BuyerId b) {
  BestAlternative best{VendorTuple(market.item_types, kNullVendor), Money{0}};
  bool first = true;
  const std::size_t cells = market.cell_count();
  for (std::size_t cell = 0; cell < cells; ++cell) {
    VendorTuple t = market.tuple_of_cell(cell);
    const Money u = market.valuation(b, t) - market.base_price(t);
    if (first || u > best.utility) {
      best = {std::move(t), u};
      first = false;
    }
  }
  return best;
}

// Everything the transfer stage needs about an allocation, computed once.
struct AllocationSummary {
  std::vector<DemandVector> demand;
  std::vector<std::size_t> tier;          // per vendor, 0 = no discount
  std::vector<Money> market_price;        // per buyer
  std::vector<Money> utility;             // per buyer
  std::vector<Money> alternative;         // per buyer, u*_b
  std::vector<Money> surplus;             // per buyer
  Money welfare{0};

  bool discounted(VendorId s) const { return tier[s.index] > 0; }
};

inline AllocationSummary summarize(const Market& market, const Allocation& alloc) {
  AllocationSummary out;
  out.demand = demand_vectors(market, alloc);
  out.tier = triggered(market, out.demand);
  const std::size_t n = market.buyer_count();
  out.market_price.resize(n);
  out.utility.resize(n);
  out.alternative.resize(n);
  out.surplus.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const BuyerId b{i};
    out.market_price[i] = tuple_market_price(market, out.tier, alloc[b]);
    out.utility[i] = market.valuation(b, alloc[b]) - out.market_price[i];
    out.alternative[i] = best_alternative(market, b).utility;
    out.surplus[i] = out.utility[i] - out.alternative[i];
    out.welfare += out.utility[i];
  }
  return out;
}

inline Money social_welfare(const Market& market, const Allocation& alloc) {
  check_allocation(market, alloc);
  const auto tiers = triggered(market, alloc);
  Money total{0};
  for (std::uint32_t i = 0; i < market.buyer_count(); ++i) {
    const BuyerId b{i};
    total += market.valuation(b, alloc[b]) - tuple_market_price(market, tiers, alloc[b]);
  }
  return total;
}

inline Money surplus(const Market& market, const Allocation& alloc, BuyerId b) {
  return utility(market, alloc, b) - best_alternative(market, b).utility;
}

// ---------------------------------------------------------------------------
// Buyer groups

struct PositiveGroup {
  std::vector<BuyerId> members;  // sorted
  Money total{0};                // sum of member surpluses
};

struct NegativeGroup {
  std::vector<BuyerId> members;  // sorted
  Money total{0};                // subsidy needed, -sum of member surpluses
};

// P+(s): discounted full-bundle buyers of s with positive surplus.
// N-(x): buyers purchasing from exactly the vendors in x with negative surplus.
struct GroupPartition {
  std::map<VendorId, PositiveGroup> positive;
  std::map<VendorSet, NegativeGroup> negative;
  std::vector<Money> surplus;

  Money available(VendorId s) const {
    const auto it = positive.find(s);
    return it == positive.end() ? Money{0} : it->second.total;
  }
  Money needed(const VendorSet& x) const {
    const auto it = negative.find(x);
    return it == negative.end() ? Money{0} : it->second.total;
  }
  Money total_needed() const {
    Money t{0};
    for (const auto& [x, g] : negative) t += g.total;
    return t;
  }
  Money total_available() const {
    Money t{0};
    for (const auto& [s, g] : positive) t += g.total;
    return t;
  }
};

inline GroupPartition group_partition(const Market& market, const Allocation& alloc, const AllocationSummary& summary) {
  GroupPartition gp;
  gp.surplus = summary.surplus;
  for (std::uint32_t i = 0; i < market.buyer_count(); ++i) {
    const BuyerId b{i};
    const Money sigma = summary.surplus[i];
    if (sigma > Money{0}) {
      const auto s = single_vendor(alloc[b]);
      if (!s || !summary.discounted(*s)) continue;  // unreachable: own choice bounds u*_b
      auto& g = gp.positive[*s];
      g.members.push_back(b);
      g.total += sigma;
    } else if (sigma < Money{0}) {
      auto& g = gp.negative[vendor_set(alloc[b])];
      g.members.push_back(b);
      g.total -= sigma;
    }
  }
  return gp;
}

inline GroupPartition group_partition(const Market& market, const Allocation& alloc) {
  return group_partition(market, alloc, summarize(market, alloc));
}

}  // namespace gbb
