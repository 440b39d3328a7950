#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "smeq/grid_function.hpp"

namespace smeq {

using Json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "1.0.0";

struct CheckRecord {
  std::string name;
  std::string status = "info";  // "pass", "fail" or "info"
  double measured = 0.0;
  double tolerance = 0.0;
  Json payload = Json::object();

  bool failed() const { return status == "fail"; }
};

/// Builds a record whose status is pass iff measured <= tolerance.
CheckRecord bounded(std::string name, double measured, double tolerance, Json payload = Json::object());

struct RunReport {
  std::string subcommand;
  Json scenario = Json::object();
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, std::string>> artifacts;
  std::optional<std::string> timestamp;

  bool all_passed() const;
};

Json to_json(const CheckRecord& c);
Json to_json(const RunReport& r);

/// %.17g, with non-finite values spelled inf / -inf / nan.
std::string format_double(double v);

/// Header `x,u,weight` (1D) or `x,y,u,weight` (2D), LF line endings.
void write_solution_csv(std::ostream& out, const GridFunction& u);
void write_solution_csv(const std::filesystem::path& path, const GridFunction& u);

/// Writes report.json (two-space indent, trailing LF).
void write_report(const std::filesystem::path& path, const RunReport& r);

std::string utc_timestamp();

}  // namespace smeq
