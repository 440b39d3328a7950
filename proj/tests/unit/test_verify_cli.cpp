#include <doctest.h>

#include <cmath>
#include <sstream>

#include "smeq/config.hpp"
#include "smeq/error.hpp"
#include "smeq/report.hpp"
#include "smeq/verify.hpp"

using namespace smeq;

namespace {

Scenario parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario(in, "t.ini");
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == "config-error");
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

const char* kLine = "[domain]\nkind = interval\na = 0\nb = 1\n";

}  // namespace

TEST_SUITE("verify_cli") {

TEST_CASE("config: defaults and component syntax") {
  const Scenario s = parse(std::string(kLine) +
                           "[potential]\n"
                           "density = power center=0.5 beta=0.5 coeff=2\n"
                           "atom = at=0.25 weight=3\n"
                           "[data]\n"
                           "density = constant value=1\n"
                           "atom = at=0.3 weight=1\n"
                           "atom = at=0.7 weight=-2\n"
                           "[mc]\nseed = 42\npaths = 500\n");
  CHECK(s.domain.dimension() == 1);
  CHECK(s.resolution == std::vector<int>{512});
  REQUIRE(s.nu.density.size() == 1);
  CHECK(s.nu.density[0].coeff == 2.0);
  CHECK(s.nu.density[0].factors.at(0).beta == 0.5);
  CHECK(s.nu.atoms.size() == 1);
  CHECK(s.mu.atoms.size() == 2);
  CHECK(s.mu.atoms[1].weight == -2.0);
  // A singular potential gets the default truncation ladder.
  CHECK(s.levels == std::vector<double>{1, 10, 100, 1e3, 1e4});
  CHECK(s.checks == known_checks());
  CHECK(s.seed_given);
  CHECK(s.mc.seed == 42u);
  CHECK(s.mc.n_paths == 500u);
  CHECK(s.probe_points().size() == 5);
  CHECK(s.echo.front().first == "domain.kind");
}

TEST_CASE("config: bounded potential needs no ladder") {
  const Scenario s = parse(std::string(kLine) + "[potential]\ndensity = constant value=1\n");
  CHECK(s.levels.empty());
  CHECK_FALSE(s.seed_given);
}

TEST_CASE("config: 2D disk with explicit checks and probes") {
  const Scenario s = parse(
      "[domain]\nkind = disk\ncenter = 0,0\nradius = 1\n"
      "[data]\natom = at=0.3,0.2 weight=1\n"
      "[mc]\nprobe = 0.1,0.1\nprobe = -0.2,0.3\n"
      "[checks]\nrun = regularity, strong_duality\n");
  CHECK(s.domain.dimension() == 2);
  CHECK(s.resolution == std::vector<int>{64});
  CHECK(s.probes.size() == 2);
  CHECK(s.checks == std::vector<std::string>{"regularity", "strong_duality"});
}

TEST_CASE("config: errors name the field and the line") {
  std::string m = config_error("[domain]\nkind = disk\ncenter = 0\nradius = 1\n");
  CHECK(m.find("domain.center") != std::string::npos);
  CHECK(m.find("t.ini:3") != std::string::npos);

  m = config_error(std::string(kLine) + "[grid]\nlevels = 1, ten\n");
  CHECK(m.find("grid.levels") != std::string::npos);
  CHECK(m.find("t.ini:6") != std::string::npos);

  m = config_error(std::string(kLine) + "[grid]\nlevels = 10, 1\n");
  CHECK(m.find("increasing") != std::string::npos);

  m = config_error(std::string(kLine) + "[potential]\ndensity = constant value=-1\n");
  CHECK(m.find("potential.density") != std::string::npos);

  m = config_error(std::string(kLine) + "[checks]\nrun = bogus\n");
  CHECK(m.find("checks.run") != std::string::npos);

  m = config_error("[domain]\nkind = sphere\n");
  CHECK(m.find("domain.kind") != std::string::npos);

  m = config_error(std::string(kLine) + "[data]\natom = at=0.3,0.2 weight=1\n");
  CHECK(m.find("data.atom") != std::string::npos);

  m = config_error(std::string(kLine) + "[mc]\nprobe = 1.5\n");
  CHECK(m.find("mc.probe") != std::string::npos);
}

TEST_CASE("report: key order, slack and number formatting") {
  RunReport r;
  r.subcommand = "verify";
  r.scenario = {{"source", "x.ini"}};
  r.checks.push_back(bounded("a", 0.5, 1.0));
  r.checks.push_back(bounded("b", 2.0, 1.0));
  r.artifacts.emplace_back("solution_csv", "solution.csv");
  const Json j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"tool", "version", "subcommand", "scenario", "checks", "artifacts",
                                         "metadata", "all_passed"});
  CHECK(j["checks"][0]["status"] == "pass");
  CHECK(j["checks"][0]["slack"].get<double>() == 0.5);
  CHECK(j["checks"][1]["status"] == "fail");
  CHECK(j["all_passed"] == false);

  r.timestamp = "2024-01-01T00:00:00Z";
  CHECK(to_json(r).dump().find("\"timestamp\"") != std::string::npos);

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(NAN) == "nan");
}

TEST_CASE("report: solution CSV layout") {
  const GridPtr g1 = make_grid(Domain::interval(0, 1), {4});
  std::ostringstream a;
  write_solution_csv(a, GridFunction::sample(g1, [](const Point& x) { return x[0]; }));
  CHECK(a.str() == "x,u,weight\n0.125,0.125,0.25\n0.375,0.375,0.25\n0.625,0.625,0.25\n0.875,0.875,0.25\n");

  const GridPtr g2 = make_grid(Domain::rectangle(0, 1, 0, 1), {2, 2});
  std::ostringstream b;
  write_solution_csv(b, GridFunction::zeros(g2));
  CHECK(b.str().rfind("x,y,u,weight\n", 0) == 0);
  CHECK(b.str().find('\r') == std::string::npos);
}

TEST_CASE("mu = 0 gives zero residuals everywhere") {
  Scenario s = parse(std::string(kLine) + "[potential]\ndensity = constant value=1\n[grid]\nresolution = 64\n");
  Session ss(s);
  for (const char* name : {"strong_duality", "regularity", "existence_criterion", "reduction_coherence"}) {
    const CheckRecord c = run_check(ss, name);
    CHECK_MESSAGE(c.status == "pass", name);
    CHECK(c.measured == doctest::Approx(0.0));
  }
}

TEST_CASE("pairing identities on nu = mu = Lebesgue") {
  Scenario s = parse(std::string(kLine) + "[potential]\ndensity = constant value=1\n[data]\ndensity = constant value=1\n");
  Session ss(s);
  // Both sides of the pairing with eta = 1 equal 1 - 2 tanh(1/2).
  const double exact = 1.0 - 2.0 * std::tanh(0.5);
  CHECK(pairing(ss.solution().solution, [](const Point&) { return 1.0; }) == doctest::Approx(exact).epsilon(1e-4));
  const CheckRecord d = check_duality_pairing(ss);
  CHECK(d.status == "pass");
  const CheckRecord r = check_regularity(ss);
  CHECK(r.status == "pass");
  CHECK(r.payload["nu_integral"]["value"].get<double>() == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("duality and strong duality agree on diffuse data") {
  for (const char* nu : {"density = constant value=1", "density = power center=0.5 beta=0.5",
                         "atom = at=0.5 weight=2"}) {
    Scenario s = parse(std::string(kLine) + "[potential]\n" + nu +
                       "\n[data]\ndensity = constant value=1\ndensity = power center=0.3 beta=0.4\n"
                       "[grid]\nresolution = 256\n");
    Session ss(s);
    CHECK_MESSAGE(check_duality_pairing(ss).status == "pass", nu);
    CHECK_MESSAGE(check_strong_duality(ss).status == "pass", nu);
    CHECK(ss.strong_duality().verdict == "small");
  }
}

TEST_CASE("existence criterion flags a planar atom on N_nu") {
  Scenario s = parse(
      "[domain]\nkind = disk\ncenter = 0,0\nradius = 1\n"
      "[potential]\ndensity = power center=0,0 beta=2.5\n"
      "[data]\natom = at=0,0 weight=1\n"
      "[grid]\nresolution = 64\nlevels = 1,10,100,1000,10000\nstop_early = false\n");
  Session ss(s);
  const StrongDuality& sd = ss.strong_duality();
  CHECK(sd.concentrated_mass == 1.0);
  CHECK(sd.expected == "bounded-away");
  CHECK(sd.verdict == "bounded-away");
  // beta = 1 residual approaches R1(0) = 1/4.
  CHECK(sd.absolute.front() == doctest::Approx(0.25).epsilon(0.1));
  CHECK(check_existence_criterion(ss).status == "pass");
  CHECK(check_reduction_coherence(ss).status == "pass");
}

TEST_CASE("run_check turns unknown names into failed records") {
  Scenario s = parse(kLine);
  Session ss(s);
  const CheckRecord c = run_check(ss, "no_such_check");
  CHECK(c.status == "fail");
}

}  // TEST_SUITE
