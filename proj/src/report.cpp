#include "smeq/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>

#include "smeq/error.hpp"

namespace smeq {

namespace {

// JSON has no inf/nan; such values are stored as strings.
Json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::ofstream open_binary(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io-error", "cannot write " + path.string());
  return out;
}

}  // namespace

CheckRecord bounded(std::string name, double measured, double tolerance, Json payload) {
  CheckRecord c;
  c.name = std::move(name);
  c.measured = measured;
  c.tolerance = tolerance;
  c.status = measured <= tolerance ? "pass" : "fail";
  c.payload = std::move(payload);
  return c;
}

bool RunReport::all_passed() const {
  for (const auto& c : checks) {
    if (c.failed()) return false;
  }
  return true;
}

Json to_json(const CheckRecord& c) {
  Json j;
  j["name"] = c.name;
  j["status"] = c.status;
  j["measured"] = number(c.measured);
  j["tolerance"] = number(c.tolerance);
  j["slack"] = number(c.tolerance - c.measured);
  j["payload"] = c.payload;
  return j;
}

Json to_json(const RunReport& r) {
  Json j;
  j["tool"] = "smeq";
  j["version"] = kToolVersion;
  j["subcommand"] = r.subcommand;
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  j["scenario"] = r.scenario;
  Json checks = Json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  j["checks"] = std::move(checks);
  Json art = Json::object();
  for (const auto& [k, v] : r.artifacts) art[k] = v;
  j["artifacts"] = std::move(art);
  j["metadata"] = {
      {"test_battery", "finite frozen battery of test functions; the pairing identities are certified on it only"},
      {"weight_rho", "1"},
  };
  j["all_passed"] = r.all_passed();
  return j;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_solution_csv(std::ostream& out, const GridFunction& u) {
  const Grid& g = *u.grid;
  out << (g.dim == 1 ? "x,u,weight\n" : "x,y,u,weight\n");
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << format_double(g.nodes[i][0]) << ',';
    if (g.dim == 2) out << format_double(g.nodes[i][1]) << ',';
    out << format_double(u.values[i]) << ',' << format_double(g.weights[i]) << '\n';
  }
}

void write_solution_csv(const std::filesystem::path& path, const GridFunction& u) {
  auto out = open_binary(path);
  write_solution_csv(out, u);
}

void write_report(const std::filesystem::path& path, const RunReport& r) {
  auto out = open_binary(path);
  out << to_json(r).dump(2) << '\n';
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace smeq
