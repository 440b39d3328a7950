#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "smeq/geometry.hpp"
#include "smeq/measure.hpp"
#include "smeq/stochastic.hpp"

namespace smeq {

/// Checks understood by the verifier, in their canonical order.
const std::vector<std::string>& known_checks();

/// One run description read from a config file.
///
///   [domain]     kind = interval | disk | rectangle, plus a/b, center/radius or a1/b1/a2/b2
///   [potential]  density / atom / curve / singular, each repeatable
///   [data]       density / atom / curve, each repeatable
///   [grid]       resolution, levels, mollifier, stop_early
///   [mc]         dt, paths, max_time, epsilon, seed, probe (repeatable)
///   [checks]     run = comma-separated check names
///
/// Component values are a family name followed by key=value tokens, e.g.
/// `density = power center=0.5 beta=0.5 coeff=1` or `atom = at=0.3,0.2 weight=-2`.
struct Scenario {
  std::string source;
  Domain domain = Domain::interval(0.0, 1.0);
  std::vector<int> resolution{512};
  MeasureSpec nu;
  std::vector<SingularPoint> declared;  // explicit singular metadata, empty when derived
  bool has_declared = false;
  MeasureSpec mu;
  std::vector<double> levels;     // empty: untruncated solve (only valid without singular points)
  std::vector<double> mollifier{10.0, 100.0, 1e3, 1e4};
  bool stop_early = true;
  PathConfig mc;
  bool seed_given = false;
  std::vector<Point> probes;
  std::vector<std::string> checks;
  /// Normalized (section.key, value) pairs in file order, echoed in reports.
  std::vector<std::pair<std::string, std::string>> echo;

  PotentialMeasure potential() const;
  /// Probe points, defaulting to five fixed interior points.
  std::vector<Point> probe_points() const;
};

/// Throws Error("config-error") with the offending line and field.
Scenario parse_scenario(std::istream& in, const std::string& source = "<config>");
Scenario load_scenario(const std::string& path);

}  // namespace smeq
