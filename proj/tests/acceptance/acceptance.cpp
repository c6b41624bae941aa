// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli_runner.hpp"
#include "fixtures.hpp"
#include "gbb/generator.hpp"
#include "gbb/io.hpp"
#include "gbb/pipeline.hpp"
#include "gbb/swm.hpp"
#include "gbb/transfers.hpp"
#include "gbb/verify.hpp"
#include "oracles.hpp"

using namespace gbb;
using Clock = std::chrono::steady_clock;
using io::Json;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Collects the first few failure messages for a criterion.
struct Verdict {
  bool ok = true;
  std::vector<std::string> why;
  std::string summary;

  void expect(bool cond, const std::string& msg) {
    if (cond) return;
    ok = false;
    if (why.size() < 5) why.push_back(msg);
  }
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Verdict()>& body) {
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.ok = false;
    v.why.push_back(std::string("exception: ") + e.what());
  }
  std::cout << (v.ok ? "PASS" : "FAIL") << "  " << id << ". " << title;
  if (!v.summary.empty()) std::cout << " (" << v.summary << ")";
  std::cout << "\n";
  for (const auto& w : v.why) std::cout << "        " << w << "\n";
  if (!v.ok) ++failures;
}

std::string str(const Json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

// The random corpus shared by criteria 2 to 5: N <= 4, M <= 2, c <= 2, values <= 20.
struct Case {
  std::uint64_t seed;
  Market market;
  std::string path;
};

std::vector<Case> corpus() {
  std::vector<Case> out;
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    GeneratorOptions o;
    o.buyers = static_cast<std::uint32_t>(1 + (seed - 1) % 4);
    o.vendors = static_cast<std::uint32_t>(1 + ((seed - 1) / 4) % 2);
    o.items = static_cast<std::uint32_t>(1 + ((seed - 1) / 8) % 2);
    o.max_value = 10;
    o.seed = seed;
    Market m = generate_market(o);
    const std::string path = cli::temp_file("acceptance_" + std::to_string(seed) + ".json", io::dump(io::instance_json(m, seed)));
    out.push_back({seed, std::move(m), path});
  }
  return out;
}

Verdict fixtures_end_to_end() {
  Verdict v;
  double slowest = 0;
  struct Expect {
    const char* file;
    std::int64_t sw;
    std::vector<std::string> prices;
  };
  for (const Expect& e : {Expect{"fix_e1.json", 6, {"6", "4"}}, Expect{"fix_e2.json", 9, {"5", "5", "5"}}}) {
    const auto t0 = Clock::now();
    const auto r = cli::run("solve " + fixtures::data_path(e.file));
    const double took = seconds_since(t0);
    slowest = std::max(slowest, took);
    v.expect(r.code == 0, std::string(e.file) + ": exit " + std::to_string(r.code));
    v.expect(took < 1.0, std::string(e.file) + ": took " + std::to_string(took) + " s");
    const Json doc = Json::parse(r.out);
    v.expect(doc["social_welfare"] == e.sw, std::string(e.file) + ": SW " + doc["social_welfare"].dump());
    for (std::size_t b = 0; b < e.prices.size(); ++b)
      v.expect(str(doc["buyers"][b]["final_price"]) == e.prices[b],
               std::string(e.file) + ": final price of buyer " + std::to_string(b) + " is " + str(doc["buyers"][b]["final_price"]));
    v.expect(doc["certificate"]["passed"] == true, std::string(e.file) + ": certificate failed");
    for (const auto& c : doc["certificate"]["checks"]) v.expect(c["passed"] == true, std::string(e.file) + ": " + str(c["name"]));
  }
  // group transfers and buyer payments
  const Json e1 = Json::parse(cli::run("solve " + fixtures::data_path("fix_e1.json")).out);
  v.expect(e1["group_transfers"] == Json::parse(R"([{"vendor":"s1","group":["s1"],"amount":1}])"), "E1 group transfers " + e1["group_transfers"].dump());
  const Json e2 = Json::parse(cli::run("solve " + fixtures::data_path("fix_e2.json")).out);
  v.expect(e2["group_transfers"] == Json::parse(R"([{"vendor":"s1","group":["s1","s2"],"amount":2}])"),
           "E2 group transfers " + e2["group_transfers"].dump());
  v.expect(e2["transfers"] == Json::parse(R"([{"from":"b1","to":"b3","amount":"1"},{"from":"b2","to":"b3","amount":"1"}])"),
           "E2 transfers " + e2["transfers"].dump());
  std::ostringstream s;
  s << "slowest " << slowest << " s";
  v.summary = s.str();
  return v;
}

Verdict oracle_equivalence(const std::vector<Case>& cases) {
  Verdict v;
  const auto t0 = Clock::now();
  for (const auto& c : cases) {
    const auto solved = cli::run("solve " + c.path);
    const auto oracled = cli::run("oracle " + c.path);
    v.expect(solved.code == 0 && oracled.code == 0, "seed " + std::to_string(c.seed) + ": exit codes " +
                                                        std::to_string(solved.code) + "/" + std::to_string(oracled.code));
    if (solved.code != 0 || oracled.code != 0) continue;
    const auto a = Json::parse(solved.out)["social_welfare"];
    const auto b = Json::parse(oracled.out)["social_welfare"];
    v.expect(a == b, "seed " + std::to_string(c.seed) + ": solve " + a.dump() + " oracle " + b.dump());
    // a third, independent opinion
    v.expect(a == oracle::max_welfare(c.market), "seed " + std::to_string(c.seed) + ": reference enumeration disagrees");
  }
  const double took = seconds_since(t0);
  v.expect(took < 60.0, "took " + std::to_string(took) + " s");
  std::ostringstream s;
  s << cases.size() << " instances, " << took << " s";
  v.summary = s.str();
  return v;
}

Verdict saturation(const std::vector<Case>& cases) {
  Verdict v;
  int with_subsidy = 0;
  for (const auto& c : cases) {
    const auto alloc = solve_swm(c.market).allocation;
    const auto gp = group_partition(c.market, alloc);
    const auto sol = max_group_transfer_flow(c.market, gp);
    v.expect(sol.flow.value == sol.required.value(), "seed " + std::to_string(c.seed) + ": flow " +
                                                         std::to_string(sol.flow.value) + " < " + to_string(sol.required));
    try {
      solve_group_transfers(c.market, gp);
    } catch (const Unstabilizable& e) {
      v.expect(false, "seed " + std::to_string(c.seed) + ": " + e.what());
    }
    with_subsidy += gp.negative.empty() ? 0 : 1;
  }
  v.summary = std::to_string(with_subsidy) + " allocations needed subsidies";
  return v;
}

Verdict observation(const std::vector<Case>& cases) {
  Verdict v;
  for (const auto& c : cases) {
    const auto s = summarize(c.market, solve_swm(c.market).allocation);
    std::int64_t pos = 0, neg = 0;
    for (Money x : s.surplus) (x.value() > 0 ? pos : neg) += std::abs(x.value());
    v.expect(pos >= neg, "seed " + std::to_string(c.seed) + ": " + std::to_string(pos) + " < " + std::to_string(neg));
  }
  return v;
}

Verdict fairness(const std::vector<Case>& cases) {
  Verdict v;
  int payers = 0;
  for (const auto& c : cases) {
    const auto sol = solve_market(c.market);
    const auto& gp = sol.pricing.groups;
    for (const auto& [s, group] : gp.positive) {
      const Rational paid_by_group(sol.pricing.group_transfers.paid_by(s));
      for (BuyerId b : group.members) {
        Rational paid{0};
        for (const auto& [key, amount] : sol.pricing.transfers.entries())
          if (key.first == b) paid += amount;
        const Rational expected = Rational(gp.surplus[b.index]) * paid_by_group / Rational(group.total);
        v.expect(paid == expected, "seed " + std::to_string(c.seed) + ": buyer " + c.market.buyers[b.index].name + " pays " +
                                       paid.str() + ", expected " + expected.str());
        ++payers;
      }
    }
    const auto r = verify::recompute(c.market, sol.swm.allocation);
    v.expect(verify::check_fair(c.market, sol.swm.allocation, sol.pricing.prices, r).passed,
             "seed " + std::to_string(c.seed) + ": check_fair failed");
  }
  v.summary = std::to_string(payers) + " payers checked";
  return v;
}

Verdict price_delta_round_trip() {
  Verdict v;
  std::mt19937_64 rng(6);
  for (int round = 0; round < 500; ++round) {
    const auto d = oracle::zero_sum_deltas(rng, 1 + rng() % 10);
    const auto t = transfers_from_price_deltas(d);
    v.expect(t.net_outflows(d.size()) == d, "round " + std::to_string(round) + ": deltas not recovered");
    for (const auto& [key, amount] : t.entries())
      v.expect(d[key.first.index].sign() > 0 && d[key.second.index].sign() < 0,
               "round " + std::to_string(round) + ": payer/payee sign mix");
  }
  v.summary = "500 vectors";
  return v;
}

bool acyclic(const CrossTransferGraph& g) {
  std::set<VendorId> nodes;
  for (const auto& [a, b] : g.edges) nodes.insert(a), nodes.insert(b);
  // Kahn: acyclic iff every node can be peeled.
  std::map<VendorId, int> indegree;
  for (const auto& [a, b] : g.edges) ++indegree[b];
  std::vector<VendorId> ready;
  for (VendorId n : nodes)
    if (!indegree[n]) ready.push_back(n);
  std::size_t peeled = 0;
  while (!ready.empty()) {
    const VendorId u = ready.back();
    ready.pop_back();
    ++peeled;
    for (const auto& [a, b] : g.edges)
      if (a == u && --indegree[b] == 0) ready.push_back(b);
  }
  return peeled == nodes.size();
}

Verdict cycle_elimination() {
  Verdict v;
  const VendorId s1{1}, s2{2}, s3{3}, s4{4};

  GroupTransfers two;
  two.set(s1, {s2}, Money{3});
  two.set(s2, {s1}, Money{5});
  GroupTransfers three;
  three.set(s1, {s2}, Money{2});
  three.set(s2, {s3}, Money{4});
  three.set(s3, {s1}, Money{3});
  for (const auto& [name, gt] : {std::pair{"2-cycle", two}, std::pair{"3-cycle", three}}) {
    v.expect(!acyclic(cross_transfer_graph(gt)), std::string(name) + ": input should be cyclic");
    const auto out = eliminate_cycles(gt);
    v.expect(verify::check_equivalent(gt, out).passed, std::string(name) + ": not equivalent");
    v.expect(acyclic(cross_transfer_graph(out)), std::string(name) + ": still cyclic");
  }

  GroupTransfers fig;
  fig.set(s1, {s3, s4}, Money{1});
  fig.set(s2, {s4}, Money{1});
  const auto edges = cross_transfer_graph(fig).edges;
  v.expect(edges == std::set<std::pair<VendorId, VendorId>>{{s1, s3}, {s1, s4}, {s2, s4}}, "edge set differs");
  return v;
}

Verdict partition_counts() {
  Verdict v;
  // Pascal's triangle, independent of partition_count.
  std::vector<std::vector<std::uint64_t>> choose(20, std::vector<std::uint64_t>(20, 0));
  for (std::size_t n = 0; n < 20; ++n) {
    choose[n][0] = 1;
    for (std::size_t k = 1; k <= n; ++k) choose[n][k] = choose[n - 1][k - 1] + choose[n - 1][k];
  }
  int pairs = 0;
  for (std::uint32_t n = 0; n <= 6; ++n) {
    for (std::size_t cells = 1; cells <= 9; ++cells) {
      std::uint64_t count = 0;
      for ([[maybe_unused]] const auto& p : enumerate_partitions(n, cells)) ++count;
      const std::uint64_t expected = choose[n + cells - 1][cells - 1];
      v.expect(count == expected, "N=" + std::to_string(n) + " cells=" + std::to_string(cells) + ": " + std::to_string(count) +
                                      " != " + std::to_string(expected));
      ++pairs;
    }
  }
  v.summary = std::to_string(pairs) + " (N, cells) pairs";
  return v;
}

Verdict flow_engine() {
  Verdict v;
  std::mt19937_64 rng(9);
  for (int round = 0; round < 50; ++round) {
    const std::size_t nodes = 2 + rng() % 11;
    const auto arcs = oracle::random_arcs(rng, nodes, true);
    const auto net = oracle::network(nodes, arcs);
    const auto f = flow::max_flow(net);
    v.expect(f.value == oracle::min_cut(nodes, arcs), "network " + std::to_string(round) + ": max flow != min cut");
    const auto g = flow::min_cost_max_flow(net);
    v.expect(g.value == f.value, "network " + std::to_string(round) + ": min-cost flow not maximum");
    for (int sample = 0; sample < 20; ++sample) {
      const auto h = oracle::random_max_flow(rng, nodes, arcs);
      v.expect(g.cost <= h.cost, "network " + std::to_string(round) + ": sampled flow cheaper");
    }
  }
  v.summary = "50 networks";
  return v;
}

// 500 buyers, 3 vendors, 2 items, allocation given: mostly discounted bundle
// buyers plus subsidized bundle and mixed-tuple buyers.
Verdict complexity_smoke() {
  Verdict v;
  Market m = Market::with_items(2);
  for (int s = 1; s <= 3; ++s)
    m.add_vendor("s" + std::to_string(s), {Money{10}, Money{10}}, {DiscountTier{{100, 100}, Money{14}}, DiscountTier{{140, 140}, Money{12}}});
  Allocation alloc;
  for (std::uint32_t b = 0; b < 500; ++b) {
    std::map<VendorTuple, Money> vals;
    VendorTuple choice;
    if (b < 450) {
      const VendorId s{1 + b % 3};
      choice = full_bundle(m, s);
      vals[choice] = Money{b % 6 == 0 ? 10 : 24 + static_cast<std::int64_t>(b % 7)};
    } else {
      const VendorId a{1 + b % 3}, c{1 + (b + 1) % 3};
      choice = {a, b % 4 == 0 ? kNullVendor : c};
      vals[choice] = Money{choice[1] == kNullVendor ? 12 : 22};
      vals[VendorTuple{c, c}] = Money{25};
    }
    m.add_buyer("b" + std::to_string(b + 1), std::move(vals));
    alloc.choice.push_back(choice);
  }
  v.expect(validate_market(m).ok(), "synthetic market invalid");

  const auto t0 = Clock::now();
  const auto pricing = price_allocation(m, alloc);
  const double took = seconds_since(t0);
  v.expect(took < 5.0, "took " + std::to_string(took) + " s");
  v.expect(!pricing.groups.negative.empty(), "no subsidized buyers, smoke test is vacuous");
  const auto cert = verify::certify(m, alloc, pricing.prices, pricing.transfers, pricing.group_transfers);
  v.expect(cert.passed(), "certificate failed");
  std::ostringstream s;
  s << took << " s, " << pricing.transfers.size() << " buyer transfers, " << pricing.groups.negative.size() << " subsidized groups";
  v.summary = s.str();
  return v;
}

}  // namespace

int main() {
  const auto cases = corpus();
  report(1, "fixture end-to-end", fixtures_end_to_end);
  report(2, "solve matches oracle on random instances", [&] { return oracle_equivalence(cases); });
  report(3, "transfer flow saturates on welfare-maximizing allocations", [&] { return saturation(cases); });
  report(4, "positive surplus covers needed subsidy", [&] { return observation(cases); });
  report(5, "payments proportional to surplus", [&] { return fairness(cases); });
  report(6, "price deltas round trip through transfers", price_delta_round_trip);
  report(7, "cycle elimination", cycle_elimination);
  report(8, "partition counts", partition_counts);
  report(9, "flow engine against cut enumeration and sampled flows", flow_engine);
  report(10, "post-allocation pricing at N=500, M=3, c=2", complexity_smoke);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
