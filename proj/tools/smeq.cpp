// smeq <solve|classify|verify|mc|converge> --config <path> [--out <dir>] [--seed <u64>] [--no-timestamp]
//
// Exit status: 0 when every check passes, 1 when a check fails, 2 for
// usage or config errors.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "smeq/config.hpp"
#include "smeq/error.hpp"
#include "smeq/report.hpp"
#include "smeq/variational.hpp"
#include "smeq/verify.hpp"

namespace fs = std::filesystem;
using namespace smeq;

namespace {

Json echo(const Scenario& s) {
  Json j = Json::object();
  j["source"] = fs::path(s.source).filename().string();
  Json entries = Json::array();
  for (const auto& [k, v] : s.echo) entries.push_back({{"key", k}, {"value", v}});
  j["entries"] = entries;
  j["domain"] = s.domain.describe();
  j["seed"] = s.seed_given ? Json(s.mc.seed) : Json(nullptr);
  return j;
}

bool needs_seed(const std::string& sub, const Scenario& s) {
  if (sub == "mc") return true;
  if (sub != "verify" || s.mu.atoms.empty()) return false;
  return std::find(s.checks.begin(), s.checks.end(), "duality_pairing") != s.checks.end();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schroedinger-type equations with measure data: solvers and verifier"};
  std::string sub, config, out = ".";
  std::uint64_t seed = 0;
  bool no_timestamp = false;
  app.add_option("subcommand", sub, "solve | classify | verify | mc | converge")
      ->required()
      ->check(CLI::IsMember({"solve", "classify", "verify", "mc", "converge"}));
  app.add_option("--config", config, "scenario file")->required();
  app.add_option("--out", out, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Monte Carlo seed (overrides [mc] seed)");
  app.add_flag("--no-timestamp", no_timestamp, "omit the timestamp from report.json");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Scenario s;
  try {
    s = load_scenario(config);
    if (seed_opt->count() > 0) {
      s.mc.seed = seed;
      s.seed_given = true;
    }
    if (needs_seed(sub, s) && !s.seed_given) {
      throw Error("config-error", config + ": field 'mc.seed': required for Monte Carlo checks (or pass --seed)");
    }
    fs::create_directories(out);
  } catch (const std::exception& e) {
    std::cerr << "smeq: " << e.what() << '\n';
    return 2;
  }

  RunReport report;
  report.subcommand = sub;
  report.scenario = echo(s);
  if (!no_timestamp) report.timestamp = utc_timestamp();

  Session session(s);
  auto run = [&](const std::string& name) {
    report.checks.push_back(run_check(session, name));
    const auto& c = report.checks.back();
    std::cerr << c.name << ": " << c.status << " (measured " << format_double(c.measured) << ", tolerance "
              << format_double(c.tolerance) << ")\n";
  };

  if (sub == "solve") {
    run("truncation_ladder");
    run("variational_agreement");
  } else if (sub == "classify") {
    run("classification");
  } else if (sub == "verify") {
    for (const auto& name : s.checks) run(name);
  } else if (sub == "mc") {
    run("mc_probes");
  } else {
    run("truncation_ladder");
    run("mollification_ladder");
  }

  try {
    if (sub != "classify" && sub != "mc") {
      const fs::path csv = fs::path(out) / "solution.csv";
      write_solution_csv(csv, session.solution().solution);
      report.artifacts.emplace_back("solution_csv", "solution.csv");
      if (sub == "solve") {
        const auto steps = mollify_and_solve(s.domain, session.grid(), session.final_potential(), s.mu,
                                             {s.mollifier.back()});
        write_solution_csv(fs::path(out) / "solution_variational.csv", steps.back().report.minimizer);
        report.artifacts.emplace_back("variational_csv", "solution_variational.csv");
      }
    }
  } catch (const std::exception& e) {
    CheckRecord c;
    c.name = "artifacts";
    c.status = "fail";
    c.payload = {{"message", e.what()}};
    report.checks.push_back(c);
  }

  try {
    write_report(fs::path(out) / "report.json", report);
  } catch (const std::exception& e) {
    std::cerr << "smeq: " << e.what() << '\n';
    return 2;
  }
  return report.all_passed() ? 0 : 1;
}
