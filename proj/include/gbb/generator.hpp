#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "gbb/model.hpp"

namespace gbb {

struct GeneratorOptions {
  std::uint32_t buyers = 4;
  std::uint32_t vendors = 2;
  std::uint32_t items = 2;
  std::uint64_t seed = 0;
  std::int64_t max_value = 10;
};

namespace detail {

// std::uniform_int_distribution differs across standard libraries; this does not.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  // Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("empty draw range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(rng_());
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do x = rng_();
    while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool chance(std::int64_t num, std::int64_t den) { return between(0, den - 1) < num; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace detail

// Seeded random market. Same options, same market.
inline Market generate_market(const GeneratorOptions& o) {
  if (o.items == 0) throw std::invalid_argument("items must be positive");
  if (o.max_value < 1) throw std::invalid_argument("max value must be positive");
  detail::Draw draw(o.seed);
  const std::size_t c = o.items;
  const std::int64_t cap = std::max<std::int64_t>(o.buyers, 1);

  Market m = Market::with_items(c);
  for (std::uint32_t s = 1; s <= o.vendors; ++s) {
    std::vector<Money> base;
    for (std::size_t k = 0; k < c; ++k) base.emplace_back(draw.between(1, o.max_value));
    std::int64_t base_sum = 0;
    for (Money p : base) base_sum += p.value();

    std::vector<DiscountTier> tiers;
    DiscountTier first;
    for (std::size_t k = 0; k < c; ++k) first.thresholds.push_back(draw.between(1, cap));
    first.bundle_price = Money{draw.between(base_sum / 2, base_sum - 1)};
    tiers.push_back(first);

    const bool room = std::any_of(first.thresholds.begin(), first.thresholds.end(), [&](std::int64_t t) { return t < cap; });
    if (draw.chance(1, 2) && room && first.bundle_price > Money{0}) {
      DiscountTier second;
      for (std::size_t k = 0; k < c; ++k) second.thresholds.push_back(draw.between(first.thresholds[k], cap));
      if (second.thresholds == first.thresholds) {
        for (std::size_t k = 0; k < c; ++k) {
          if (second.thresholds[k] < cap) {
            ++second.thresholds[k];
            break;
          }
        }
      }
      const std::int64_t p1 = first.bundle_price.value();
      second.bundle_price = Money{draw.between(p1 / 2, p1 - 1)};
      tiers.push_back(second);
    }
    m.add_vendor("s" + std::to_string(s), std::move(base), std::move(tiers));
  }

  const auto vendor_count = static_cast<std::int64_t>(m.vendor_count());
  for (std::uint32_t b = 1; b <= o.buyers; ++b) {
    std::map<VendorTuple, Money> vals;
    for (std::uint32_t s = 1; s <= o.vendors; ++s)
      if (draw.chance(3, 4)) vals[full_bundle(m, VendorId{s})] = Money{draw.between(1, static_cast<std::int64_t>(c) * o.max_value)};
    const std::int64_t mixed = o.vendors == 0 ? 0 : draw.between(0, 2);
    for (std::int64_t i = 0; i < mixed; ++i) {
      VendorTuple t;
      std::int64_t bought = 0;
      for (std::size_t k = 0; k < c; ++k) {
        t.push_back(VendorId{static_cast<std::uint32_t>(draw.between(0, vendor_count - 1))});
        if (t.back() != kNullVendor) ++bought;
      }
      if (bought == 0 || vals.count(t)) continue;
      vals[t] = Money{draw.between(1, bought * o.max_value)};
    }
    m.add_buyer("b" + std::to_string(b), std::move(vals));
  }
  return m;
}

}  // namespace gbb
