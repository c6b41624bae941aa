// gbb: group buying with volume discounts from the command line.
//
//   gbb solve <instance>            SWM + transfers + prices + certificate
//   gbb oracle <instance>           same report, SWM by exhaustive search
//   gbb gen --buyers N ...          seeded random instance
//   gbb verify <instance> <sol>     re-run the certificate on a stored solution
//   gbb partitions <instance>       number of partitions the solver enumerates
//
// Exit codes: 0 ok, 1 check failed, 2 bad input, 3 budget exceeded, 4 unstabilizable.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "gbb/generator.hpp"
#include "gbb/io.hpp"
#include "gbb/pipeline.hpp"
#include "gbb/swm.hpp"
#include "gbb/transfers.hpp"
#include "gbb/verify.hpp"

namespace {

enum Exit : int { kOk = 0, kCheckFailed = 1, kBadInput = 2, kBudget = 3, kUnstable = 4 };

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gbb::io::ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

gbb::io::InstanceDocument load_instance(const std::string& path) {
  auto doc = gbb::io::parse_instance(slurp(path));
  const auto report = gbb::validate_market(doc.market);
  if (!report.ok()) {
    std::string msg = path + ": invalid market";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw gbb::io::ParseError(msg);
  }
  return doc;
}

void emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

void print_report(const gbb::verify::CertificateReport& report) {
  for (const auto& c : report.checks) {
    std::cerr << (c.passed ? "pass  " : "FAIL  ") << c.name << "\n";
    for (const auto& w : c.witnesses) std::cerr << "      " << w << "\n";
  }
  std::cerr << "surplus available " << report.surplus_available << ", subsidy needed " << report.subsidy_needed << "\n";
}

struct SolveFlags {
  std::string instance;
  std::string out;
  std::uint64_t max_partitions = 5'000'000;
  std::uint64_t max_allocations = 1'000'000;
  unsigned jobs = 1;
  bool no_certify = false;
  bool timings = false;
};

int run_solve(const SolveFlags& flags, gbb::SwmMethod method) {
  using Clock = std::chrono::steady_clock;
  const auto ms = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  const auto doc = load_instance(flags.instance);
  const gbb::Market& market = doc.market;

  gbb::MarketSolution sol;
  const auto t0 = Clock::now();
  if (method == gbb::SwmMethod::kFlow) {
    gbb::SwmOptions opts;
    opts.max_partitions = flags.max_partitions;
    opts.jobs = flags.jobs;
    sol.swm = gbb::solve_swm(market, opts);
  } else {
    sol.swm = gbb::brute_force_swm(market, flags.max_allocations);
  }
  const auto t1 = Clock::now();
  sol.pricing = gbb::price_allocation(market, sol.swm.allocation);
  const auto t2 = Clock::now();
  if (!flags.no_certify)
    sol.certificate = gbb::verify::certify(market, sol.swm.allocation, sol.pricing.prices, sol.pricing.transfers,
                                           sol.pricing.group_transfers);
  const auto t3 = Clock::now();

  gbb::io::SolverMetadata meta;
  meta.method = method == gbb::SwmMethod::kFlow ? "flow" : "exhaustive";
  meta.seed = doc.seed;
  if (flags.timings) meta.timings_ms = std::map<std::string, double>{{"swm", ms(t0, t1)}, {"pricing", ms(t1, t2)}, {"certify", ms(t2, t3)}};
  emit(gbb::io::dump(gbb::io::solution_json(market, gbb::io::make_solution(sol, meta))), flags.out);

  if (!sol.certificate) return kOk;
  if (!sol.certificate->passed()) {
    print_report(*sol.certificate);
    return kCheckFailed;
  }
  return kOk;
}

int run_verify(const std::string& instance, const std::string& solution) {
  const auto doc = load_instance(instance);
  const auto sol = gbb::io::parse_solution(doc.market, slurp(solution));
  const auto report = gbb::verify::certify(doc.market, sol.allocation, sol.prices, sol.transfers, sol.group_transfers);
  for (const auto& c : report.checks) {
    std::cout << (c.passed ? "pass  " : "FAIL  ") << c.name << "\n";
    for (const auto& w : c.witnesses) std::cout << "      " << w << "\n";
  }
  std::cout << "surplus available " << report.surplus_available << ", subsidy needed " << report.subsidy_needed << "\n";
  return report.passed() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group buying with volume discounts: welfare-maximizing allocation, stable fair prices, certificates."};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  auto* solve = app.add_subcommand("solve", "Solve an instance and print the solution document");
  solve->add_option("instance", solve_flags.instance, "Instance file")->required();
  solve->add_option("--out", solve_flags.out, "Write the solution here instead of stdout");
  solve->add_option("--max-partitions", solve_flags.max_partitions, "Refuse instances with more partitions than this");
  solve->add_option("--jobs", solve_flags.jobs, "Worker threads for partition evaluation")->check(CLI::PositiveNumber);
  solve->add_flag("--no-certify", solve_flags.no_certify, "Skip the certificate");
  solve->add_flag("--timings", solve_flags.timings, "Record stage timings (output no longer reproducible)");

  SolveFlags oracle_flags;
  auto* oracle = app.add_subcommand("oracle", "Solve by exhaustive search over allocations");
  oracle->add_option("instance", oracle_flags.instance, "Instance file")->required();
  oracle->add_option("--out", oracle_flags.out, "Write the solution here instead of stdout");
  oracle->add_option("--max-allocations", oracle_flags.max_allocations, "Refuse instances with more allocations than this");
  oracle->add_flag("--no-certify", oracle_flags.no_certify, "Skip the certificate");
  oracle->add_flag("--timings", oracle_flags.timings, "Record stage timings");

  gbb::GeneratorOptions gen_opts;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a seeded random instance");
  gen->add_option("--buyers", gen_opts.buyers, "Number of buyers");
  gen->add_option("--vendors", gen_opts.vendors, "Number of vendors, not counting the null vendor");
  gen->add_option("--items", gen_opts.items, "Number of item types")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_opts.seed, "Random seed");
  gen->add_option("--max-value", gen_opts.max_value, "Largest base price; valuations go up to items * this")
      ->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "Write the instance here instead of stdout");

  std::string verify_instance, verify_solution;
  auto* verify = app.add_subcommand("verify", "Re-run the certificate on a stored solution");
  verify->add_option("instance", verify_instance, "Instance file")->required();
  verify->add_option("solution", verify_solution, "Solution file")->required();

  std::string count_instance;
  auto* partitions = app.add_subcommand("partitions", "Print the number of partitions for an instance");
  partitions->add_option("instance", count_instance, "Instance file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*solve) return run_solve(solve_flags, gbb::SwmMethod::kFlow);
    if (*oracle) return run_solve(oracle_flags, gbb::SwmMethod::kExhaustive);
    if (*gen) {
      emit(gbb::io::dump(gbb::io::instance_json(gbb::generate_market(gen_opts), gen_opts.seed)), gen_out);
      return kOk;
    }
    if (*verify) return run_verify(verify_instance, verify_solution);
    if (*partitions) {
      const auto doc = load_instance(count_instance);
      std::cout << gbb::partition_count(doc.market.buyer_count(), doc.market.cell_count()) << "\n";
      return kOk;
    }
  } catch (const gbb::io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const gbb::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadInput;
  } catch (const gbb::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const gbb::Unstabilizable& e) {
    std::cerr << "error: " << e.what() << "\n  group " << e.group().size() << " vendors, deficit " << e.deficit() << "\n";
    return kUnstable;
  }
  return kOk;
}
