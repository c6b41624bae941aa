#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gbb/model.hpp"
#include "gbb/rational.hpp"
#include "gbb/transfers.hpp"

// Certifiers for stability, rationality, fairness and consistency of an
// allocation-price pair. Market prices and surpluses are recomputed here from
// the raw market rather than taken from solver intermediates.
namespace gbb::verify {

struct CheckResult {
  std::string name;
  bool passed = true;
  std::vector<std::string> witnesses;

  void fail(std::string witness) {
    passed = false;
    witnesses.push_back(std::move(witness));
  }
};

struct CertificateReport {
  std::vector<CheckResult> checks;
  // Whole-market sides of the subsidy balance: sum of positive surpluses and
  // sum of negated negative surpluses.
  Money surplus_available{0};
  Money subsidy_needed{0};

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

// Independent re-derivation of per-buyer quantities.
struct Recomputed {
  std::vector<std::vector<std::int64_t>> demand;
  std::vector<bool> discounting;     // per vendor
  std::vector<Money> market_price;   // per buyer
  std::vector<Money> surplus;        // per buyer
};

inline Recomputed recompute(const Market& market, const Allocation& alloc) {
  check_allocation(market, alloc);
  Recomputed r;
  const std::size_t c = market.item_types;
  r.demand.assign(market.vendor_count(), std::vector<std::int64_t>(c, 0));
  for (const auto& t : alloc.choice)
    for (std::size_t k = 0; k < c; ++k) r.demand[t[k].index][k] += 1;

  std::vector<const DiscountTier*> active(market.vendor_count(), nullptr);
  r.discounting.assign(market.vendor_count(), false);
  for (std::size_t s = 0; s < market.vendor_count(); ++s) {
    for (const auto& tier : market.vendors[s].tiers) {
      bool met = true;
      for (std::size_t k = 0; k < c; ++k) met = met && r.demand[s][k] >= tier.thresholds[k];
      if (met) active[s] = &tier;  // tiers are ordered, keep the last one met
    }
    r.discounting[s] = active[s] != nullptr;
  }

  const auto base = [&](const VendorTuple& t) {
    Money p{0};
    for (std::size_t k = 0; k < c; ++k) p += market.vendors[t[k].index].base_prices[k];
    return p;
  };

  // All tuples, to find each buyer's best deviation at base prices.
  std::vector<VendorTuple> tuples{VendorTuple{}};
  for (std::size_t k = 0; k < c; ++k) {
    std::vector<VendorTuple> longer;
    for (const auto& prefix : tuples) {
      for (std::uint32_t s = 0; s < market.vendor_count(); ++s) {
        auto t = prefix;
        t.push_back(VendorId{s});
        longer.push_back(std::move(t));
      }
    }
    tuples = std::move(longer);
  }

  for (std::uint32_t i = 0; i < market.buyer_count(); ++i) {
    const VendorTuple& t = alloc.choice[i];
    const bool bundle = std::all_of(t.begin(), t.end(), [&](VendorId s) { return s == t.front(); });
    const Money price = bundle && active[t.front().index] ? active[t.front().index]->bundle_price : base(t);
    r.market_price.push_back(price);

    Money alternative{0};
    for (const auto& alt : tuples) alternative = std::max(alternative, market.valuation(BuyerId{i}, alt) - base(alt));
    r.surplus.push_back(market.valuation(BuyerId{i}, t) - price - alternative);
  }
  return r;
}

inline std::string buyer_label(const Market& market, std::size_t b) { return "buyer " + market.buyers[b].name; }

// No buyer gains by deviating: delta_b <= sigma_b (deviations pay base prices).
inline CheckResult check_stable(const Market& market, const Allocation& alloc, const PriceVector& prices,
                                const Recomputed& r) {
  CheckResult out{"stable", true, {}};
  for (std::uint32_t b = 0; b < market.buyer_count(); ++b) {
    const Rational& delta = prices.buyers[b].delta;
    if (delta <= Rational(r.surplus[b])) continue;
    const Money before_delta = market.valuation(BuyerId{b}, alloc.choice[b]) - r.market_price[b];
    const Rational with_delta = Rational(before_delta) - delta;
    out.fail(buyer_label(market, b) + ": utility " + with_delta.str() + " < best deviation " +
             to_string(before_delta - r.surplus[b]) + " (delta " + delta.str() + " > surplus " + to_string(r.surplus[b]) +
             ")");
  }
  return out;
}

// Premiums only from discounted positive-surplus bundle buyers whose vendor
// serves some subsidized buyer.
inline CheckResult check_rational_prices(const Market& market, const Allocation& alloc, const PriceVector& prices,
                                         const Recomputed& r) {
  CheckResult out{"rational_prices", true, {}};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) {
    if (prices.buyers[b].delta.sign() <= 0) continue;
    const std::string who = buyer_label(market, b) + " pays premium " + prices.buyers[b].delta.str();
    if (r.surplus[b] <= Money{0}) {
      out.fail(who + " with surplus " + to_string(r.surplus[b]) + " <= 0");
      continue;
    }
    const auto s = single_vendor(alloc.choice[b]);
    if (!s || !r.discounting[s->index]) {
      out.fail(who + " but does not buy a discounted bundle");
      continue;
    }
    bool served = false;
    for (std::size_t o = 0; o < market.buyer_count() && !served; ++o) {
      const auto& t = alloc.choice[o];
      served = r.surplus[o] < Money{0} && std::find(t.begin(), t.end(), *s) != t.end();
    }
    if (!served) out.fail(who + " but no subsidized buyer purchases from vendor " + market.vendors[s->index].name);
  }
  return out;
}

// Same choice, both positive surplus: delta_b * sigma_b' == delta_b' * sigma_b.
inline CheckResult check_fair(const Market& market, const Allocation& alloc, const PriceVector& prices, const Recomputed& r) {
  CheckResult out{"fair", true, {}};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) {
    if (r.surplus[b] <= Money{0}) continue;
    for (std::size_t o = b + 1; o < market.buyer_count(); ++o) {
      if (r.surplus[o] <= Money{0} || alloc.choice[o] != alloc.choice[b]) continue;
      const Rational lhs = prices.buyers[b].delta * Rational(r.surplus[o]);
      const Rational rhs = prices.buyers[o].delta * Rational(r.surplus[b]);
      if (lhs != rhs)
        out.fail(buyer_label(market, b) + " / " + market.buyers[o].name + ": " + prices.buyers[b].delta.str() + " * " +
                 to_string(r.surplus[o]) + " != " + prices.buyers[o].delta.str() + " * " + to_string(r.surplus[b]));
    }
  }
  return out;
}

// Each delta equals the buyer's net outflow under t.
inline CheckResult check_p_consistent(const Market& market, const PriceVector& prices, const TransferMatrix& t) {
  CheckResult out{"p_consistent", true, {}};
  std::vector<Rational> net(market.buyer_count(), Rational{0});
  for (const auto& [key, v] : t.entries()) {
    if (key.first.index >= net.size() || key.second.index >= net.size()) {
      out.fail("transfer references unknown buyer");
      return out;
    }
    net[key.first.index] += v;
    net[key.second.index] -= v;
  }
  for (std::size_t b = 0; b < market.buyer_count(); ++b)
    if (prices.buyers[b].delta != net[b])
      out.fail(buyer_label(market, b) + ": delta " + prices.buyers[b].delta.str() + " != net transfer " + net[b].str());
  return out;
}

inline CheckResult check_budget_balance(const Market& market, const PriceVector& prices) {
  CheckResult out{"budget_balance", true, {}};
  Rational sum{0};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) sum += prices.buyers[b].delta;
  if (sum.sign() != 0) out.fail("sum of price deltas is " + sum.str() + ", expected 0");
  return out;
}

// Stored market prices match the recomputation and final = market + delta.
inline CheckResult check_market_prices(const Market& market, const PriceVector& prices, const Recomputed& r) {
  CheckResult out{"market_prices", true, {}};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) {
    const auto& p = prices.buyers[b];
    if (p.market_price != r.market_price[b])
      out.fail(buyer_label(market, b) + ": market price " + to_string(p.market_price) + " != recomputed " +
               to_string(r.market_price[b]));
    if (p.final_price != Rational(p.market_price) + p.delta)
      out.fail(buyer_label(market, b) + ": final price " + p.final_price.str() + " != market price + delta");
  }
  return out;
}

// The three lines of the group condition: per-vendor budget, exact per-group
// coverage, no cross-transfers.
inline CheckResult check_group_condition(const Market& market, const GroupPartition& gp, const GroupTransfers& gt) {
  CheckResult out{"group_condition", true, {}};
  std::map<VendorId, Money> paid;
  std::map<VendorSet, Money> received;
  for (const auto& [key, v] : gt.entries()) {
    paid[key.first] += v;
    received[key.second] += v;
    if (v > Money{0} && !contains(key.second, key.first))
      out.fail("line 3: cross-transfer " + to_string(v) + " from " + market.vendor(key.first).name + " to group " +
               market.set_name(key.second));
  }
  for (const auto& [s, v] : paid)
    if (v > gp.available(s))
      out.fail("line 1: vendor " + market.vendor(s).name + " group pays " + to_string(v) + " > surplus " +
               to_string(gp.available(s)));
  std::set<VendorSet> groups;
  for (const auto& [x, g] : gp.negative) groups.insert(x);
  for (const auto& [x, v] : received) groups.insert(x);
  for (const auto& x : groups) {
    const Money got = received.count(x) ? received[x] : Money{0};
    if (got != gp.needed(x))
      out.fail("line 2: group " + market.set_name(x) + " receives " + to_string(got) + " != needed " + to_string(gp.needed(x)));
  }
  return out;
}

// Same per-vendor outgoing totals and per-group incoming totals.
inline CheckResult check_equivalent(const GroupTransfers& a, const GroupTransfers& b) {
  CheckResult out{"equivalence", true, {}};
  std::map<VendorId, std::pair<Money, Money>> by_vendor;
  std::map<VendorSet, std::pair<Money, Money>> by_group;
  for (const auto& [key, v] : a.entries()) {
    by_vendor[key.first].first += v;
    by_group[key.second].first += v;
  }
  for (const auto& [key, v] : b.entries()) {
    by_vendor[key.first].second += v;
    by_group[key.second].second += v;
  }
  for (const auto& [s, totals] : by_vendor)
    if (totals.first != totals.second)
      out.fail("vendor #" + std::to_string(s.index) + " pays " + to_string(totals.first) + " vs " + to_string(totals.second));
  for (const auto& [x, totals] : by_group)
    if (totals.first != totals.second)
      out.fail("group of " + std::to_string(x.size()) + " vendors receives " + to_string(totals.first) + " vs " +
               to_string(totals.second));
  return out;
}

// Runs every check. The group condition is evaluated against groups rebuilt
// from the recomputed surpluses.
inline CertificateReport certify(const Market& market, const Allocation& alloc, const PriceVector& prices,
                                 const TransferMatrix& transfers, const GroupTransfers& group_transfers) {
  CertificateReport report;
  if (prices.buyers.size() != market.buyer_count()) throw ModelError("price vector does not cover every buyer");
  const Recomputed r = recompute(market, alloc);

  GroupPartition gp;
  gp.surplus = r.surplus;
  for (std::uint32_t b = 0; b < market.buyer_count(); ++b) {
    const Money sigma = r.surplus[b];
    if (sigma > Money{0}) {
      const auto s = single_vendor(alloc.choice[b]);
      if (s && r.discounting[s->index]) {
        gp.positive[*s].members.push_back(BuyerId{b});
        gp.positive[*s].total += sigma;
      }
      report.surplus_available += sigma;
    } else if (sigma < Money{0}) {
      auto& g = gp.negative[vendor_set(alloc.choice[b])];
      g.members.push_back(BuyerId{b});
      g.total -= sigma;
      report.subsidy_needed -= sigma;
    }
  }

  report.checks.push_back(check_stable(market, alloc, prices, r));
  report.checks.push_back(check_rational_prices(market, alloc, prices, r));
  report.checks.push_back(check_fair(market, alloc, prices, r));
  report.checks.push_back(check_p_consistent(market, prices, transfers));
  report.checks.push_back(check_group_condition(market, gp, group_transfers));
  report.checks.push_back(check_budget_balance(market, prices));
  report.checks.push_back(check_market_prices(market, prices, r));
  return report;
}

}  // namespace gbb::verify
