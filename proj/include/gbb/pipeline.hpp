#pragma once

#include <optional>

#include "gbb/model.hpp"
#include "gbb/swm.hpp"
#include "gbb/transfers.hpp"
#include "gbb/verify.hpp"

namespace gbb {

struct PricingResult {
  AllocationSummary summary;
  GroupPartition groups;
  GroupTransfers group_transfers;
  TransferMatrix transfers;
  PriceVector prices;
};

// Group transfers by max flow, then fair buyer transfers and final prices.
// Throws Unstabilizable when the allocation admits no rational stabilizing transfers.
inline PricingResult price_allocation(const Market& market, const Allocation& alloc) {
  PricingResult out;
  out.summary = summarize(market, alloc);
  out.groups = group_partition(market, alloc, out.summary);
  out.group_transfers = solve_group_transfers(market, out.groups);
  out.transfers = fair_buyer_transfers(out.groups, out.group_transfers);

  const auto deltas = out.transfers.net_outflows(market.buyer_count());
  Rational balance{0};
  for (std::size_t b = 0; b < market.buyer_count(); ++b) {
    out.prices.buyers.push_back({out.summary.market_price[b], deltas[b], Rational(out.summary.market_price[b]) + deltas[b]});
    balance += deltas[b];
  }
  if (balance.sign() != 0) throw std::logic_error("buyer transfers are not budget balanced");
  return out;
}

enum class SwmMethod { kFlow, kExhaustive };

struct SolveOptions {
  SwmOptions swm;
  SwmMethod method = SwmMethod::kFlow;
  std::uint64_t max_allocations = 1'000'000;  // exhaustive method only
  bool certify = true;
};

struct MarketSolution {
  SwmResult swm;
  PricingResult pricing;
  std::optional<verify::CertificateReport> certificate;
};

inline MarketSolution solve_market(const Market& market, const SolveOptions& options = {}) {
  MarketSolution out;
  out.swm = options.method == SwmMethod::kFlow ? solve_swm(market, options.swm) : brute_force_swm(market, options.max_allocations);
  out.pricing = price_allocation(market, out.swm.allocation);
  if (options.certify)
    out.certificate = verify::certify(market, out.swm.allocation, out.pricing.prices, out.pricing.transfers,
                                      out.pricing.group_transfers);
  return out;
}

}  // namespace gbb
