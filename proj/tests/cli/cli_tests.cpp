// End-to-end runs of the smeq binary. SMEQ_BIN, SMEQ_DATA and SMEQ_GOLDEN
// are injected by CMake; SMEQ_UPDATE_GOLDEN=1 rewrites the golden files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string err;
  fs::path out;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run smeq(const std::string& args, const std::string& tag) {
  Run r;
  r.out = fs::temp_directory_path() / ("smeq_cli_" + tag);
  fs::remove_all(r.out);
  fs::create_directories(r.out);
  const fs::path err = r.out / "stderr.txt";
  const std::string cmd = std::string("\"") + SMEQ_BIN + "\" " + args + " --out \"" + r.out.string() + "\" 2> \"" +
                          err.string() + "\" > /dev/null";
  const int status = std::system(cmd.c_str());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string data(const char* name) { return std::string("--config \"") + SMEQ_DATA + "/" + name + "\""; }

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::ordered_json report(const Run& r) {
  return nlohmann::ordered_json::parse(slurp(r.out / "report.json"));
}

void golden(const fs::path& produced, const std::string& name) {
  const fs::path g = fs::path(SMEQ_GOLDEN) / name;
  if (const char* u = std::getenv("SMEQ_UPDATE_GOLDEN"); u && std::string(u) == "1") {
    fs::copy_file(produced, g, fs::copy_options::overwrite_existing);
  }
  CHECK_MESSAGE(slurp(produced) == slurp(g), "differs from golden " << name);
}

}  // namespace

TEST_CASE("minimal solve writes u = x(1-x)/2") {
  const Run r = smeq("solve " + data("minimal.ini") + " --no-timestamp", "minimal");
  CHECK(r.code == 0);
  std::string header;
  const auto rows = read_csv(r.out / "solution.csv", &header);
  CHECK(header == "x,u,weight");
  REQUIRE(rows.size() == 64);
  double err = 0.0;
  for (const auto& row : rows) err = std::max(err, std::abs(row[1] - row[0] * (1 - row[0]) / 2));
  CHECK(err < 1e-3);
  CHECK(fs::exists(r.out / "solution_variational.csv"));
  const auto j = report(r);
  CHECK(j["subcommand"] == "solve");
  CHECK_FALSE(j.contains("timestamp"));
  CHECK(j["all_passed"] == true);
}

TEST_CASE("verify on the closed-form 1D battery exits 0") {
  const Run r = smeq("verify " + data("battery_1d.ini") + " --no-timestamp", "battery");
  CHECK(r.code == 0);
  const auto j = report(r);
  std::vector<std::string> names;
  for (const auto& c : j["checks"]) {
    names.push_back(c["name"]);
    CHECK(c.contains("tolerance"));
    CHECK(c.contains("slack"));
    CHECK_MESSAGE(c["status"] == "pass", c["name"].get<std::string>());
  }
  // Every requested check appears exactly once, in canonical order.
  CHECK(names == std::vector<std::string>{"duality_pairing", "strong_duality", "regularity", "existence_criterion",
                                          "resolvent_identity", "reduction_coherence"});
  CHECK(j["scenario"]["seed"] == 20240917);
}

TEST_CASE("verify with the atom on a 1D singular point exits 0") {
  CHECK(smeq("verify " + data("singular_1d.ini") + " --no-timestamp", "singular").code == 0);
}

TEST_CASE("reduction scenario: criterion and residual agree") {
  const Run r = smeq("verify " + data("reduction_2d.ini") + " --no-timestamp", "reduction");
  CHECK(r.code == 0);
  const auto j = report(r);
  for (const auto& c : j["checks"]) {
    if (c["name"] == "existence_criterion") {
      CHECK(c["payload"]["criterion"] == "no-strong-solution");
      CHECK(c["payload"]["residual_verdict"] == "no-strong-solution");
    }
  }
  std::string header;
  read_csv(r.out / "solution.csv", &header);
  CHECK(header == "x,y,u,weight");
}

TEST_CASE("classify lists the origin in N_nu") {
  const Run r = smeq("classify " + data("reduction_2d.ini") + " --no-timestamp", "classify");
  CHECK(r.code == 0);
  const auto j = report(r);
  REQUIRE(j["checks"].size() == 1);
  CHECK(j["checks"][0]["name"] == "classification");
  CHECK(j["checks"][0]["payload"].dump().find("n_nu") != std::string::npos);
  CHECK_FALSE(fs::exists(r.out / "solution.csv"));
}

TEST_CASE("malformed config: nonzero exit naming the field") {
  Run r = smeq("verify " + data("disk_1coord.ini"), "disk1");
  CHECK(r.code == 2);
  CHECK(r.err.find("domain.center") != std::string::npos);
  CHECK(r.err.find("disk_1coord.ini:3") != std::string::npos);

  r = smeq("solve " + data("bad_number.ini"), "badnum");
  CHECK(r.code == 2);
  CHECK(r.err.find("grid.levels") != std::string::npos);

  r = smeq("solve --config /nonexistent/x.ini", "missing");
  CHECK(r.code == 2);

  r = smeq("frobnicate " + data("minimal.ini"), "badsub");
  CHECK(r.code == 2);
}

TEST_CASE("Monte Carlo subcommand requires a seed") {
  Run r = smeq("mc " + data("minimal.ini"), "noseed");
  CHECK(r.code == 2);
  CHECK(r.err.find("mc.seed") != std::string::npos);
}

TEST_CASE("mc subcommand estimates at the probes") {
  const Run r = smeq("mc " + data("singular_1d.ini") + " --seed 3 --no-timestamp", "mc");
  CHECK(r.code == 0);
  const auto j = report(r);
  CHECK(j["checks"][0]["name"] == "mc_probes");
  CHECK(j["scenario"]["seed"] == 3);
}

TEST_CASE("converge reports both ladders") {
  const Run r = smeq("converge " + data("singular_1d.ini") + " --no-timestamp", "converge");
  CHECK(r.code == 0);
  const auto j = report(r);
  REQUIRE(j["checks"].size() == 2);
  CHECK(j["checks"][0]["name"] == "truncation_ladder");
  CHECK(j["checks"][1]["name"] == "mollification_ladder");
}

TEST_CASE("reports are byte-identical across runs and match the goldens") {
  const Run a = smeq("verify " + data("golden_1d.ini") + " --no-timestamp", "golden_a");
  const Run b = smeq("verify " + data("golden_1d.ini") + " --no-timestamp", "golden_b");
  CHECK(a.code == 0);
  CHECK(slurp(a.out / "report.json") == slurp(b.out / "report.json"));
  CHECK(slurp(a.out / "solution.csv") == slurp(b.out / "solution.csv"));
  golden(a.out / "report.json", "golden_1d.report.json");
  golden(a.out / "solution.csv", "golden_1d.solution.csv");

  // Seeded Monte Carlo output is reproducible too.
  const Run c = smeq("verify " + data("battery_1d.ini") + " --no-timestamp", "seeded_a");
  const Run d = smeq("verify " + data("battery_1d.ini") + " --no-timestamp", "seeded_b");
  CHECK(slurp(c.out / "report.json") == slurp(d.out / "report.json"));
}

TEST_CASE("timestamp present unless suppressed") {
  const Run r = smeq("solve " + data("minimal.ini"), "stamp");
  const auto j = report(r);
  REQUIRE(j.contains("timestamp"));
  CHECK(j["timestamp"].get<std::string>().back() == 'Z');
  const std::string text = slurp(r.out / "report.json");
  CHECK(text.back() == '\n');
  CHECK(text.find('\r') == std::string::npos);
}
