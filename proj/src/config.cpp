#include "smeq/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/program_options.hpp>

#include "smeq/error.hpp"

namespace po = boost::program_options;

namespace smeq {

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names{"duality_pairing",    "strong_duality",      "regularity",
                                              "existence_criterion", "resolvent_identity", "reduction_coherence"};
  return names;
}

namespace {

class Reader {
 public:
  Reader(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
    std::string where = source_;
    if (const int line = line_of(field); line > 0) where += ":" + std::to_string(line);
    throw Error("config-error", where + ": field '" + field + "': " + msg);
  }

  // First line defining section.key, 0 when absent.
  int line_of(const std::string& field) const {
    std::istringstream in(text_);
    std::string line, section;
    for (int n = 1; std::getline(in, line); ++n) {
      boost::trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        section = boost::trim_copy(line.substr(1, line.find(']') - 1));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      if (section + "." + boost::trim_copy(line.substr(0, eq)) == field) return n;
    }
    return 0;
  }

  double number(const std::string& field, const std::string& s) const {
    const std::string t = boost::trim_copy(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty() || !std::isfinite(v)) {
      fail(field, "expected a number, got '" + t + "'");
    }
    return v;
  }

  std::vector<double> numbers(const std::string& field, const std::string& s) const {
    std::vector<std::string> parts;
    boost::split(parts, s, boost::is_any_of(","));
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(number(field, p));
    return out;
  }

  Point point(const std::string& field, const std::string& s, int dim) const {
    const auto v = numbers(field, s);
    if (static_cast<int>(v.size()) != dim) {
      fail(field, "expected " + std::to_string(dim) + " coordinate(s), got " + std::to_string(v.size()));
    }
    return dim == 1 ? Point(v[0]) : Point(v[0], v[1]);
  }

  const std::string& text() const { return text_; }

 private:
  std::string text_;
  std::string source_;
};

// "family k=v k=v ..." with keys allowed to repeat (product densities).
struct Component {
  std::string family;
  std::vector<std::pair<std::string, std::string>> args;

  std::vector<std::string> all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : args) {
      if (k == key) out.push_back(v);
    }
    return out;
  }
};

Component split_component(const Reader& r, const std::string& field, const std::string& value, bool has_family) {
  std::vector<std::string> tok;
  const std::string t = boost::trim_copy(value);
  boost::split(tok, t, boost::is_space(), boost::token_compress_on);
  Component c;
  std::size_t i = 0;
  if (has_family) {
    if (tok.empty() || tok[0].empty() || tok[0].find('=') != std::string::npos) {
      r.fail(field, "missing component family");
    }
    c.family = tok[i++];
  }
  for (; i < tok.size(); ++i) {
    const auto eq = tok[i].find('=');
    if (eq == std::string::npos || eq == 0) r.fail(field, "expected key=value, got '" + tok[i] + "'");
    c.args.emplace_back(tok[i].substr(0, eq), tok[i].substr(eq + 1));
  }
  return c;
}

void require_keys(const Reader& r, const std::string& field, const Component& c,
                  const std::vector<std::string>& allowed) {
  for (const auto& [k, v] : c.args) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      r.fail(field, "unknown key '" + k + "' for '" + (c.family.empty() ? std::string("component") : c.family) + "'");
    }
  }
}

std::string single(const Reader& r, const std::string& field, const Component& c, const std::string& key,
                   const std::string& fallback = {}) {
  const auto v = c.all(key);
  if (v.size() > 1) r.fail(field, "key '" + key + "' given more than once");
  if (v.empty()) {
    if (fallback.empty()) r.fail(field, "missing key '" + key + "'");
    return fallback;
  }
  return v[0];
}

DensityTerm parse_density(const Reader& r, const std::string& field, const std::string& value, int dim) {
  const Component c = split_component(r, field, value, true);
  DensityTerm t;
  if (c.family == "constant") {
    require_keys(r, field, c, {"value"});
    t.coeff = r.number(field, single(r, field, c, "value"));
  } else if (c.family == "power") {
    require_keys(r, field, c, {"center", "beta", "coeff"});
    t.coeff = r.number(field, single(r, field, c, "coeff", "1"));
    t.factors.push_back({r.point(field, single(r, field, c, "center"), dim),
                         r.number(field, single(r, field, c, "beta"))});
  } else if (c.family == "product") {
    require_keys(r, field, c, {"center", "beta", "coeff"});
    t.coeff = r.number(field, single(r, field, c, "coeff", "1"));
    const auto centers = c.all("center");
    const auto betas = c.all("beta");
    if (centers.empty() || centers.size() != betas.size()) r.fail(field, "product needs matching center/beta pairs");
    for (std::size_t i = 0; i < centers.size(); ++i) {
      t.factors.push_back({r.point(field, centers[i], dim), r.number(field, betas[i])});
    }
  } else {
    r.fail(field, "unknown density family '" + c.family + "' (constant, power, product)");
  }
  for (const auto& f : t.factors) {
    if (f.beta < 0.0) r.fail(field, "beta must be nonnegative");
  }
  return t;
}

Atom parse_atom(const Reader& r, const std::string& field, const std::string& value, int dim) {
  const Component c = split_component(r, field, value, false);
  require_keys(r, field, c, {"at", "weight"});
  return {r.point(field, single(r, field, c, "at"), dim), r.number(field, single(r, field, c, "weight", "1"))};
}

CurveComponent parse_curve(const Reader& r, const std::string& field, const std::string& value, int dim) {
  if (dim != 2) r.fail(field, "curve components need a two-dimensional domain");
  const Component c = split_component(r, field, value, true);
  CurveComponent cc;
  if (c.family == "circle") {
    require_keys(r, field, c, {"center", "radius", "density"});
    Circle circ{r.point(field, single(r, field, c, "center"), 2), r.number(field, single(r, field, c, "radius"))};
    if (!(circ.radius > 0.0)) r.fail(field, "radius must be positive");
    cc.support = circ;
  } else if (c.family == "segment") {
    require_keys(r, field, c, {"p", "q", "density"});
    cc.support = Segment{r.point(field, single(r, field, c, "p"), 2), r.point(field, single(r, field, c, "q"), 2)};
  } else {
    r.fail(field, "unknown curve family '" + c.family + "' (circle, segment)");
  }
  cc.density.coeff = r.number(field, single(r, field, c, "density", "1"));
  return cc;
}

SingularPoint parse_singular(const Reader& r, const std::string& field, const std::string& value, int dim) {
  const Component c = split_component(r, field, value, false);
  require_keys(r, field, c, {"at", "beta", "coeff"});
  return {r.point(field, single(r, field, c, "at"), dim), r.number(field, single(r, field, c, "beta")),
          r.number(field, single(r, field, c, "coeff", "1"))};
}

Domain parse_domain(const Reader& r, const po::variables_map& vm) {
  auto get = [&](const char* key) -> std::string {
    const std::string field = std::string("domain.") + key;
    if (!vm.count(field)) r.fail(field, "missing");
    return vm[field].as<std::string>();
  };
  const std::string kind = vm.count("domain.kind") ? boost::trim_copy(vm["domain.kind"].as<std::string>()) : "";
  auto reject = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      const std::string field = std::string("domain.") + k;
      if (vm.count(field)) r.fail(field, "not used by a '" + kind + "' domain");
    }
  };
  try {
    if (kind == "interval") {
      reject({"center", "radius", "a1", "b1", "a2", "b2"});
      return Domain::interval(r.number("domain.a", get("a")), r.number("domain.b", get("b")));
    }
    if (kind == "disk") {
      reject({"a", "b", "a1", "b1", "a2", "b2"});
      return Domain::disk(r.point("domain.center", get("center"), 2), r.number("domain.radius", get("radius")));
    }
    if (kind == "rectangle") {
      reject({"a", "b", "center", "radius"});
      return Domain::rectangle(r.number("domain.a1", get("a1")), r.number("domain.b1", get("b1")),
                               r.number("domain.a2", get("a2")), r.number("domain.b2", get("b2")));
    }
  } catch (const Error& e) {
    if (e.code() == "config-error") throw;
    r.fail("domain.kind", e.what());
  }
  r.fail("domain.kind", kind.empty() ? "missing" : "unknown domain kind '" + kind + "'");
}

std::vector<std::string> list_of(const po::variables_map& vm, const std::string& key) {
  return vm.count(key) ? vm[key].as<std::vector<std::string>>() : std::vector<std::string>{};
}

MeasureSpec parse_measure(const Reader& r, const po::variables_map& vm, const std::string& section,
                          const Domain& d) {
  const int dim = d.dimension();
  MeasureSpec m;
  for (const auto& v : list_of(vm, section + ".density")) m.density.push_back(parse_density(r, section + ".density", v, dim));
  for (const auto& v : list_of(vm, section + ".atom")) m.atoms.push_back(parse_atom(r, section + ".atom", v, dim));
  for (const auto& v : list_of(vm, section + ".curve")) m.curves.push_back(parse_curve(r, section + ".curve", v, dim));
  try {
    check_supported(m, d, section);
  } catch (const Error& e) {
    const std::string field = section + (m.atoms.empty() ? (m.curves.empty() ? ".density" : ".curve") : ".atom");
    r.fail(field, e.what());
  }
  return m;
}

}  // namespace

PotentialMeasure Scenario::potential() const {
  const int dim = domain.dimension();
  return has_declared ? PotentialMeasure(nu, declared, dim) : PotentialMeasure(nu, dim);
}

std::vector<Point> Scenario::probe_points() const {
  if (!probes.empty()) return probes;
  std::vector<Point> out;
  if (const auto* i = std::get_if<Interval>(&domain.shape())) {
    for (double s : {0.1, 0.25, 0.45, 0.6, 0.85}) out.emplace_back(i->a + s * (i->b - i->a));
  } else if (const auto* c = std::get_if<Disk>(&domain.shape())) {
    const double off[5][2] = {{0.1, 0.2}, {-0.35, 0.1}, {0.2, -0.4}, {-0.5, -0.3}, {0.6, 0.15}};
    for (const auto& o : off) out.emplace_back(c->center[0] + c->radius * o[0], c->center[1] + c->radius * o[1]);
  } else {
    const auto& q = std::get<Rectangle>(domain.shape());
    const double frac[5][2] = {{0.2, 0.3}, {0.45, 0.6}, {0.7, 0.25}, {0.35, 0.8}, {0.8, 0.7}};
    for (const auto& f : frac) out.emplace_back(q.a1 + f[0] * (q.b1 - q.a1), q.a2 + f[1] * (q.b2 - q.a2));
  }
  return out;
}

Scenario parse_scenario(std::istream& in, const std::string& source) {
  std::stringstream buf;
  buf << in.rdbuf();
  const Reader r(buf.str(), source);

  po::options_description desc;
  auto str = [] { return po::value<std::string>(); };
  auto many = [] { return po::value<std::vector<std::string>>()->composing(); };
  desc.add_options()
      ("domain.kind", str())("domain.a", str())("domain.b", str())("domain.center", str())("domain.radius", str())
      ("domain.a1", str())("domain.b1", str())("domain.a2", str())("domain.b2", str())
      ("potential.density", many())("potential.atom", many())("potential.curve", many())
      ("potential.singular", many())
      ("data.density", many())("data.atom", many())("data.curve", many())
      ("grid.resolution", str())("grid.levels", str())("grid.mollifier", str())("grid.stop_early", str())
      ("mc.dt", str())("mc.paths", str())("mc.max_time", str())("mc.epsilon", str())("mc.seed", str())
      ("mc.probe", many())
      ("checks.run", str());

  po::variables_map vm;
  po::parsed_options parsed(&desc);
  try {
    std::istringstream text(r.text());
    parsed = po::parse_config_file(text, desc, false);
    po::store(parsed, vm);
    po::notify(vm);
  } catch (const po::error_with_option_name& e) {
    r.fail(e.get_option_name(), e.what());
  } catch (const po::error& e) {
    throw Error("config-error", source + ": " + e.what());
  }

  Scenario s;
  s.source = source;
  for (const auto& o : parsed.options) {
    for (const auto& v : o.value) s.echo.emplace_back(o.string_key, boost::trim_copy(v));
  }

  s.domain = parse_domain(r, vm);
  const int dim = s.domain.dimension();

  s.nu = parse_measure(r, vm, "potential", s.domain);
  for (const auto& t : s.nu.density) {
    if (t.coeff < 0.0) r.fail("potential.density", "potential must be nonnegative");
  }
  for (const auto& a : s.nu.atoms) {
    if (a.weight < 0.0) r.fail("potential.atom", "potential must be nonnegative");
  }
  for (const auto& c : s.nu.curves) {
    if (c.density.coeff < 0.0) r.fail("potential.curve", "potential must be nonnegative");
  }
  for (const auto& v : list_of(vm, "potential.singular")) {
    s.declared.push_back(parse_singular(r, "potential.singular", v, dim));
    s.has_declared = true;
  }
  s.mu = parse_measure(r, vm, "data", s.domain);

  if (vm.count("grid.resolution")) {
    s.resolution.clear();
    for (double v : r.numbers("grid.resolution", vm["grid.resolution"].as<std::string>())) {
      if (v != std::floor(v) || v < 2 || v > 4096) r.fail("grid.resolution", "expected integers in [2, 4096]");
      s.resolution.push_back(static_cast<int>(v));
    }
    if (s.resolution.size() > static_cast<std::size_t>(dim)) {
      r.fail("grid.resolution", "more counts than domain dimensions");
    }
  } else if (dim == 2) {
    s.resolution = {64};
  }
  if (vm.count("grid.levels")) {
    s.levels = r.numbers("grid.levels", vm["grid.levels"].as<std::string>());
    for (std::size_t i = 0; i < s.levels.size(); ++i) {
      if (!(s.levels[i] > 0.0) || (i > 0 && !(s.levels[i] > s.levels[i - 1]))) {
        r.fail("grid.levels", "levels must be positive and increasing");
      }
    }
  } else if (!s.potential().singular_points().empty()) {
    s.levels = {1.0, 10.0, 100.0, 1e3, 1e4};
  }
  if (vm.count("grid.mollifier")) {
    s.mollifier = r.numbers("grid.mollifier", vm["grid.mollifier"].as<std::string>());
    for (std::size_t i = 0; i < s.mollifier.size(); ++i) {
      if (!(s.mollifier[i] > 0.0) || (i > 0 && !(s.mollifier[i] > s.mollifier[i - 1]))) {
        r.fail("grid.mollifier", "mollifier ladder must be positive and increasing");
      }
    }
  }
  if (vm.count("grid.stop_early")) {
    const std::string v = boost::trim_copy(vm["grid.stop_early"].as<std::string>());
    if (v != "true" && v != "false") r.fail("grid.stop_early", "expected true or false");
    s.stop_early = v == "true";
  }

  if (vm.count("mc.dt")) s.mc.dt = r.number("mc.dt", vm["mc.dt"].as<std::string>());
  if (vm.count("mc.max_time")) s.mc.max_time = r.number("mc.max_time", vm["mc.max_time"].as<std::string>());
  if (vm.count("mc.epsilon")) s.mc.shell_epsilon = r.number("mc.epsilon", vm["mc.epsilon"].as<std::string>());
  if (vm.count("mc.paths")) {
    const double p = r.number("mc.paths", vm["mc.paths"].as<std::string>());
    if (p != std::floor(p) || p < 1 || p > 1e9) r.fail("mc.paths", "expected a positive integer");
    s.mc.n_paths = static_cast<std::size_t>(p);
  } else {
    s.mc.n_paths = 10000;
  }
  if (vm.count("mc.seed")) {
    const std::string t = boost::trim_copy(vm["mc.seed"].as<std::string>());
    std::uint64_t seed = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), seed);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty()) r.fail("mc.seed", "expected an unsigned 64-bit integer");
    s.mc.seed = seed;
    s.seed_given = true;
  }
  try {
    s.mc.validate();
  } catch (const Error& e) {
    r.fail(s.mc.shell_epsilon > 0.0 ? "mc.epsilon" : "mc.dt", e.what());
  }
  for (const auto& v : list_of(vm, "mc.probe")) {
    const Point p = r.point("mc.probe", v, dim);
    if (!contains(s.domain, p)) r.fail("mc.probe", "probe " + to_string(p) + " is not inside the domain");
    s.probes.push_back(p);
  }

  if (vm.count("checks.run")) {
    std::vector<std::string> names;
    const std::string v = vm["checks.run"].as<std::string>();
    boost::split(names, v, boost::is_any_of(","));
    for (auto& n : names) {
      boost::trim(n);
      if (n == "all") {
        s.checks = known_checks();
        continue;
      }
      const auto& k = known_checks();
      if (std::find(k.begin(), k.end(), n) == k.end()) r.fail("checks.run", "unknown check '" + n + "'");
      if (std::find(s.checks.begin(), s.checks.end(), n) == s.checks.end()) s.checks.push_back(n);
    }
  } else {
    s.checks = known_checks();
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("config-error", path + ": cannot open file");
  return parse_scenario(in, path);
}

}  // namespace smeq
