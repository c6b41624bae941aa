#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gbb/model.hpp"
#include "gbb/pipeline.hpp"
#include "gbb/rational.hpp"
#include "gbb/transfers.hpp"
#include "gbb/verify.hpp"

// Instance ("gbb-market/1") and solution ("gbb-solution/1") documents.
// Unknown fields are rejected; rationals are lowest-terms strings.
namespace gbb::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kInstanceSchema = "gbb-market/1";
inline constexpr const char* kSolutionSchema = "gbb-solution/1";

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void expect_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> required,
                        std::initializer_list<const char*> optional = {}) {
  if (!obj.is_object()) throw ParseError(where + ": expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!obj.contains(k)) throw ParseError(where + ": missing field '" + k + "'");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& [key, value] : obj.items())
    if (!known.count(key)) throw ParseError(where + ": unknown field '" + key + "'");
}

inline std::int64_t integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
  return j.get<std::int64_t>();
}

inline std::string string(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

inline const Json& array(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array");
  return j;
}

inline Rational rational(const Json& j, const std::string& where) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  try {
    return Rational::parse(string(j, where));
  } catch (const std::invalid_argument& e) {
    throw ParseError(where + ": " + e.what());
  }
}

inline VendorId vendor_ref(const Market& m, const Json& j, const std::string& where) {
  const std::string name = string(j, where);
  const auto id = m.find_vendor(name);
  if (!id) throw ParseError(where + ": unknown vendor '" + name + "'");
  return *id;
}

inline BuyerId buyer_ref(const Market& m, const Json& j, const std::string& where) {
  const std::string name = string(j, where);
  const auto id = m.find_buyer(name);
  if (!id) throw ParseError(where + ": unknown buyer '" + name + "'");
  return *id;
}

inline VendorTuple tuple(const Market& m, const Json& j, const std::string& where) {
  VendorTuple t;
  for (const auto& v : array(j, where)) t.push_back(vendor_ref(m, v, where));
  if (t.size() != m.item_types) throw ParseError(where + ": tuple arity " + std::to_string(t.size()) + " != item_types");
  return t;
}

inline Json names(const Market& m, const std::vector<VendorId>& ids) {
  Json out = Json::array();
  for (VendorId s : ids) out.push_back(m.vendor(s).name);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Instances

struct InstanceDocument {
  Market market;
  std::optional<std::uint64_t> seed;
};

inline InstanceDocument parse_instance(const Json& doc) {
  using namespace detail;
  expect_keys(doc, "instance", {"schema", "item_types", "vendors", "buyers"}, {"seed"});
  if (string(doc["schema"], "schema") != kInstanceSchema) throw ParseError("instance: unsupported schema '" + doc["schema"].get<std::string>() + "'");
  const std::int64_t c = integer(doc["item_types"], "item_types");
  if (c < 1) throw ParseError("item_types must be at least 1");

  InstanceDocument out{Market::with_items(static_cast<std::size_t>(c)), std::nullopt};
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) throw ParseError("seed: expected a nonnegative integer");
    out.seed = doc["seed"].get<std::uint64_t>();
  }
  Market& m = out.market;

  std::set<std::string> vendor_names{kNullVendorName};
  for (const auto& v : array(doc["vendors"], "vendors")) {
    expect_keys(v, "vendor", {"id", "base_prices"}, {"discounts"});
    const std::string id = string(v["id"], "vendor.id");
    if (!vendor_names.insert(id).second)
      throw ParseError("vendor id '" + id + (id == kNullVendorName ? "' is reserved" : "' is duplicated"));
    const std::string where = "vendor '" + id + "'";
    std::vector<Money> base;
    for (const auto& p : array(v["base_prices"], where + ".base_prices")) base.emplace_back(integer(p, where + ".base_prices"));
    std::vector<DiscountTier> tiers;
    if (v.contains("discounts")) {
      for (const auto& d : array(v["discounts"], where + ".discounts")) {
        expect_keys(d, where + ".discounts[]", {"thresholds", "bundle_price"});
        DiscountTier tier;
        for (const auto& t : array(d["thresholds"], where + ".thresholds")) tier.thresholds.push_back(integer(t, where + ".thresholds"));
        tier.bundle_price = Money{integer(d["bundle_price"], where + ".bundle_price")};
        tiers.push_back(std::move(tier));
      }
    }
    m.add_vendor(id, std::move(base), std::move(tiers));
  }

  std::set<std::string> buyer_names;
  for (const auto& b : array(doc["buyers"], "buyers")) {
    expect_keys(b, "buyer", {"id", "valuations"});
    const std::string id = string(b["id"], "buyer.id");
    if (!buyer_names.insert(id).second) throw ParseError("buyer id '" + id + "' is duplicated");
    const std::string where = "buyer '" + id + "'";
    std::map<VendorTuple, Money> vals;
    for (const auto& entry : array(b["valuations"], where + ".valuations")) {
      expect_keys(entry, where + ".valuations[]", {"choice", "value"});
      VendorTuple t = tuple(m, entry["choice"], where + ".choice");
      if (!vals.emplace(std::move(t), Money{integer(entry["value"], where + ".value")}).second)
        throw ParseError(where + ": duplicate valuation tuple");
    }
    m.add_buyer(id, std::move(vals));
  }
  return out;
}

inline InstanceDocument parse_instance(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return parse_instance(doc);
}

inline Json instance_json(const Market& m, std::optional<std::uint64_t> seed = std::nullopt) {
  Json doc;
  doc["schema"] = kInstanceSchema;
  if (seed) doc["seed"] = *seed;
  doc["item_types"] = m.item_types;
  doc["vendors"] = Json::array();
  for (std::size_t s = 1; s < m.vendor_count(); ++s) {
    const Vendor& v = m.vendors[s];
    Json jv;
    jv["id"] = v.name;
    jv["base_prices"] = Json::array();
    for (Money p : v.base_prices) jv["base_prices"].push_back(p.value());
    jv["discounts"] = Json::array();
    for (const auto& tier : v.tiers) jv["discounts"].push_back(Json{{"thresholds", tier.thresholds}, {"bundle_price", tier.bundle_price.value()}});
    doc["vendors"].push_back(std::move(jv));
  }
  doc["buyers"] = Json::array();
  for (const Buyer& b : m.buyers) {
    Json jb;
    jb["id"] = b.name;
    jb["valuations"] = Json::array();
    for (const auto& [t, value] : b.valuations) jb["valuations"].push_back(Json{{"choice", detail::names(m, t)}, {"value", value.value()}});
    doc["buyers"].push_back(std::move(jb));
  }
  return doc;
}

inline std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Solutions

struct SolverMetadata {
  std::string method = "flow";
  std::uint64_t partition_count = 0;
  std::uint64_t partitions_evaluated = 0;
  std::optional<std::uint64_t> seed;
  std::optional<std::map<std::string, double>> timings_ms;
};

struct SolutionDocument {
  Allocation allocation;
  Money welfare;
  PriceVector prices;
  std::vector<Money> utility;
  std::vector<Money> surplus;
  GroupTransfers group_transfers;
  TransferMatrix transfers;
  std::optional<verify::CertificateReport> certificate;
  SolverMetadata solver;
};

inline SolutionDocument make_solution(const MarketSolution& sol, SolverMetadata meta) {
  meta.partition_count = sol.swm.partition_count;
  meta.partitions_evaluated = sol.swm.evaluated;
  return SolutionDocument{sol.swm.allocation,
                          sol.swm.welfare,
                          sol.pricing.prices,
                          sol.pricing.summary.utility,
                          sol.pricing.summary.surplus,
                          sol.pricing.group_transfers,
                          sol.pricing.transfers,
                          sol.certificate,
                          std::move(meta)};
}

inline Json certificate_json(const verify::CertificateReport& report) {
  Json j;
  j["passed"] = report.passed();
  j["surplus_available"] = report.surplus_available.value();
  j["subsidy_needed"] = report.subsidy_needed.value();
  j["checks"] = Json::array();
  for (const auto& c : report.checks) j["checks"].push_back(Json{{"name", c.name}, {"passed", c.passed}, {"witnesses", c.witnesses}});
  return j;
}

inline Json solution_json(const Market& m, const SolutionDocument& s) {
  Json doc;
  doc["schema"] = kSolutionSchema;
  doc["social_welfare"] = s.welfare.value();
  doc["allocation"] = Json::array();
  for (std::size_t b = 0; b < m.buyer_count(); ++b)
    doc["allocation"].push_back(Json{{"buyer", m.buyers[b].name}, {"choice", detail::names(m, s.allocation.choice[b])}});
  doc["buyers"] = Json::array();
  for (std::size_t b = 0; b < m.buyer_count(); ++b) {
    const auto& p = s.prices.buyers[b];
    doc["buyers"].push_back(Json{{"id", m.buyers[b].name},
                                 {"market_price", p.market_price.value()},
                                 {"delta", p.delta.str()},
                                 {"final_price", p.final_price.str()},
                                 {"utility", s.utility[b].value()},
                                 {"surplus", s.surplus[b].value()}});
  }
  doc["group_transfers"] = Json::array();
  for (const auto& [key, amount] : s.group_transfers.entries())
    doc["group_transfers"].push_back(
        Json{{"vendor", m.vendor(key.first).name}, {"group", detail::names(m, key.second)}, {"amount", amount.value()}});
  doc["transfers"] = Json::array();
  for (const auto& [key, amount] : s.transfers.entries())
    doc["transfers"].push_back(
        Json{{"from", m.buyers[key.first.index].name}, {"to", m.buyers[key.second.index].name}, {"amount", amount.str()}});
  doc["certificate"] = s.certificate ? certificate_json(*s.certificate) : Json(nullptr);
  Json solver;
  solver["method"] = s.solver.method;
  solver["partition_count"] = s.solver.partition_count;
  solver["partitions_evaluated"] = s.solver.partitions_evaluated;
  solver["seed"] = s.solver.seed ? Json(*s.solver.seed) : Json(nullptr);
  if (s.solver.timings_ms) {
    solver["timings_ms"] = Json::object();
    for (const auto& [k, v] : *s.solver.timings_ms) solver["timings_ms"][k] = v;
  }
  doc["solver"] = std::move(solver);
  return doc;
}

// Reads back everything the certifiers need. Buyer sets must match the instance.
inline SolutionDocument parse_solution(const Market& m, const Json& doc) {
  using namespace detail;
  expect_keys(doc, "solution",
              {"schema", "social_welfare", "allocation", "buyers", "group_transfers", "transfers", "certificate", "solver"});
  if (string(doc["schema"], "schema") != kSolutionSchema) throw ParseError("solution: unsupported schema");

  SolutionDocument s;
  s.welfare = Money{integer(doc["social_welfare"], "social_welfare")};

  const std::size_t n = m.buyer_count();
  std::vector<std::optional<VendorTuple>> choice(n);
  for (const auto& a : array(doc["allocation"], "allocation")) {
    expect_keys(a, "allocation[]", {"buyer", "choice"});
    const BuyerId b = buyer_ref(m, a["buyer"], "allocation.buyer");
    if (choice[b.index]) throw ParseError("allocation lists buyer '" + m.buyers[b.index].name + "' twice");
    choice[b.index] = tuple(m, a["choice"], "allocation.choice");
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (!choice[b]) throw ParseError("allocation is missing buyer '" + m.buyers[b].name + "'");
    s.allocation.choice.push_back(*choice[b]);
  }

  std::vector<std::optional<BuyerPrice>> prices(n);
  s.utility.assign(n, Money{0});
  s.surplus.assign(n, Money{0});
  for (const auto& jb : array(doc["buyers"], "buyers")) {
    expect_keys(jb, "buyers[]", {"id", "market_price", "delta", "final_price", "utility", "surplus"});
    const BuyerId b = buyer_ref(m, jb["id"], "buyers.id");
    if (prices[b.index]) throw ParseError("buyers lists '" + m.buyers[b.index].name + "' twice");
    prices[b.index] = BuyerPrice{Money{integer(jb["market_price"], "market_price")}, rational(jb["delta"], "delta"),
                                 rational(jb["final_price"], "final_price")};
    s.utility[b.index] = Money{integer(jb["utility"], "utility")};
    s.surplus[b.index] = Money{integer(jb["surplus"], "surplus")};
  }
  for (std::size_t b = 0; b < n; ++b) {
    if (!prices[b]) throw ParseError("buyers is missing '" + m.buyers[b].name + "'");
    s.prices.buyers.push_back(*prices[b]);
  }

  for (const auto& g : array(doc["group_transfers"], "group_transfers")) {
    expect_keys(g, "group_transfers[]", {"vendor", "group", "amount"});
    VendorSet x;
    for (const auto& v : array(g["group"], "group_transfers.group")) x.push_back(vendor_ref(m, v, "group_transfers.group"));
    if (vendor_set(x) != x) throw ParseError("group_transfers.group must be sorted and duplicate-free");
    const Money amount{integer(g["amount"], "group_transfers.amount")};
    if (amount < Money{0}) throw ParseError("group_transfers.amount must be nonnegative");
    s.group_transfers.add(vendor_ref(m, g["vendor"], "group_transfers.vendor"), x, amount);
  }
  for (const auto& t : array(doc["transfers"], "transfers")) {
    expect_keys(t, "transfers[]", {"from", "to", "amount"});
    const Rational amount = rational(t["amount"], "transfers.amount");
    if (amount.sign() < 0) throw ParseError("transfers.amount must be nonnegative");
    const BuyerId from = buyer_ref(m, t["from"], "transfers.from");
    const BuyerId to = buyer_ref(m, t["to"], "transfers.to");
    if (from == to) throw ParseError("transfers: buyer pays itself");
    s.transfers.add(from, to, amount);
  }

  const Json& solver = doc["solver"];
  expect_keys(solver, "solver", {"method", "partition_count", "partitions_evaluated", "seed"}, {"timings_ms"});
  s.solver.method = string(solver["method"], "solver.method");
  s.solver.partition_count = static_cast<std::uint64_t>(integer(solver["partition_count"], "solver.partition_count"));
  s.solver.partitions_evaluated = static_cast<std::uint64_t>(integer(solver["partitions_evaluated"], "solver.partitions_evaluated"));
  if (!solver["seed"].is_null()) s.solver.seed = static_cast<std::uint64_t>(integer(solver["seed"], "solver.seed"));
  if (!doc["certificate"].is_null())
    expect_keys(doc["certificate"], "certificate", {"passed", "surplus_available", "subsidy_needed", "checks"});
  return s;
}

inline SolutionDocument parse_solution(const Market& m, const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return parse_solution(m, doc);
}

}  // namespace gbb::io
