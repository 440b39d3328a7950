#include "smeq/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "smeq/error.hpp"
#include "smeq/stochastic.hpp"
#include "smeq/variational.hpp"

namespace smeq {

namespace {

// Normalized bounding-box coordinates.
struct Frame {
  double x0, lx, y0, ly;
  explicit Frame(const Domain& d) {
    const Box b = d.bounding_box();
    x0 = b.lo[0];
    lx = b.hi[0] - b.lo[0];
    y0 = b.lo[1];
    ly = b.hi[1] - b.lo[1];
  }
  double s(const Point& p) const { return (p[0] - x0) / lx; }
  double t(const Point& p) const { return (p[1] - y0) / ly; }
};

std::function<double(const Point&)> bump(const Frame& f, int dim, double cs, double ct) {
  constexpr double w = 0.1;
  if (dim == 1) {
    return [f, cs](const Point& p) {
      const double a = f.s(p) - cs;
      return std::exp(-a * a / (2 * w * w));
    };
  }
  return [f, cs, ct](const Point& p) {
    const double a = f.s(p) - cs;
    const double b = f.t(p) - ct;
    return std::exp(-(a * a + b * b) / (2 * w * w));
  };
}

MeasureSpec absolute(const MeasureSpec& m) {
  MeasureSpec out = m;
  for (auto& t : out.density) {
    t.coeff = std::abs(t.coeff);
    if (t.fn) t.fn = [f = t.fn](const Point& x) { return std::abs(f(x)); };
  }
  for (auto& a : out.atoms) a.weight = std::abs(a.weight);
  for (auto& c : out.curves) {
    c.density.coeff = std::abs(c.density.coeff);
    if (c.density.fn) c.density.fn = [f = c.density.fn](const Point& x) { return std::abs(f(x)); };
  }
  if (out.multiplier) out.multiplier = [f = m.multiplier](const Point& x) { return std::abs(f(x)); };
  return out;
}

MeasureSpec without_atoms(const MeasureSpec& m) {
  MeasureSpec out = m;
  out.atoms.clear();
  return out;
}

std::vector<double> masses_or_zero(const MeasureSpec& m, const Domain& d, const Grid& g) {
  if (m.empty()) return std::vector<double>(g.size(), 0.0);
  return lumped_masses(m, d, g);
}

double last_delta(const SolveReport& r) { return r.l1_deltas.empty() ? 0.0 : r.l1_deltas.back(); }

Json point_json(const Point& p) {
  Json j = Json::array();
  for (int k = 0; k < p.dim; ++k) j.push_back(p[k]);
  return j;
}

Json array_of(const std::vector<double>& v) {
  Json j = Json::array();
  for (double x : v) j.push_back(std::isfinite(x) ? Json(x) : Json(format_double(x)));
  return j;
}

// MC bias allowance per unit atom weight and unit sup|η|: the shell and
// time-step errors are O(sqrt(dt) + ε); the constant is the one frozen for
// the stochastic engine tests.
double mc_bias(const PathConfig& cfg) { return 0.1 * (std::sqrt(cfg.dt) + cfg.epsilon()); }

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::vector<TestFunction> test_battery(const Domain& d) {
  const Frame f(d);
  const int dim = d.dimension();
  std::vector<TestFunction> out;
  out.push_back({"one", [](const Point&) { return 1.0; }, 1.0});
  out.push_back({"x", [f](const Point& p) { return f.s(p); }, 1.0});
  if (dim == 1) {
    out.push_back({"x(1-x)", [f](const Point& p) { return f.s(p) * (1 - f.s(p)); }, 0.25});
    for (double c : {0.25, 0.5, 0.75}) out.push_back({"bump" + label(c), bump(f, 1, c, 0), 1.0});
    return out;
  }
  if (const auto* disk = std::get_if<Disk>(&d.shape())) {
    out.push_back({"cap",
                   [c = disk->center, r = disk->radius](const Point& p) {
                     const double q = distance(p, c) / r;
                     return std::max(0.0, 1 - q * q);
                   },
                   1.0});
  } else {
    out.push_back({"cap", [f](const Point& p) { return 16 * f.s(p) * (1 - f.s(p)) * f.t(p) * (1 - f.t(p)); }, 1.0});
  }
  const double centres[3][2] = {{0.5, 0.5}, {0.3, 0.6}, {0.7, 0.35}};
  for (const auto& c : centres) {
    out.push_back({"bump" + label(c[0]) + "," + label(c[1]), bump(f, 2, c[0], c[1]), 1.0});
  }
  return out;
}

std::vector<TestFunction> density_battery(const Domain& d) {
  const Frame f(d);
  auto out = test_battery(d);
  if (d.dimension() == 1) {
    out.push_back({"x^2", [f](const Point& p) { return f.s(p) * f.s(p); }, 1.0});
    out.push_back({"(1-x)^2", [f](const Point& p) { return (1 - f.s(p)) * (1 - f.s(p)); }, 1.0});
  } else {
    out.push_back({"y", [f](const Point& p) { return f.t(p); }, 1.0});
    out.push_back({"xy", [f](const Point& p) { return f.s(p) * f.t(p); }, 1.0});
  }
  return out;
}

std::vector<TestFunction> narrow_battery(const Domain& d) {
  const Frame f(d);
  const int dim = d.dimension();
  auto z = [f, dim](const Point& p) { return dim == 1 ? f.s(p) : 0.5 * (f.s(p) + f.t(p)); };
  return {{"one", [](const Point&) { return 1.0; }, 1.0},
          {"x", [f](const Point& p) { return f.s(p); }, 1.0},
          {"z^2", [z](const Point& p) { return z(p) * z(p); }, 1.0},
          {"z(1-z)", [z](const Point& p) { return z(p) * (1 - z(p)); }, 0.25},
          {"exp(z)", [z](const Point& p) { return std::exp(z(p)); }, std::exp(1.0)}};
}

double interpolate(const GridFunction& u, const Point& x) {
  const Grid& g = *u.grid;
  if (g.dim == 1) {
    const double h = g.spacing[0];
    const double pos = (x[0] - g.origin[0]) / h - 0.5;
    const int n = g.resolution[0];
    if (pos <= 0.0) {
      const double t = std::clamp((x[0] - g.origin[0]) / (0.5 * h), 0.0, 1.0);
      return t * u.values[0];
    }
    if (pos >= n - 1) {
      const double t = std::clamp((g.origin[0] + n * h - x[0]) / (0.5 * h), 0.0, 1.0);
      return t * u.values[static_cast<std::size_t>(n - 1)];
    }
    const int i = static_cast<int>(std::floor(pos));
    const double t = pos - i;
    return (1 - t) * u.values[static_cast<std::size_t>(i)] + t * u.values[static_cast<std::size_t>(i + 1)];
  }
  const double px = (x[0] - g.origin[0]) / g.spacing[0] - 0.5;
  const double py = (x[1] - g.origin[1]) / g.spacing[1] - 0.5;
  const int ix = static_cast<int>(std::floor(px));
  const int iy = static_cast<int>(std::floor(py));
  const double full = g.spacing[0] * g.spacing[1] * (1 - 1e-12);
  int idx[4];
  bool ok = true;
  for (int k = 0; k < 4; ++k) {
    idx[k] = g.node_of_cell(ix + (k & 1), iy + (k >> 1));
    if (idx[k] < 0 || g.weights[static_cast<std::size_t>(idx[k])] < full) ok = false;
  }
  if (!ok) return u.values[g.nearest_node(x)];
  const double tx = px - ix;
  const double ty = py - iy;
  auto v = [&](int k) { return u.values[static_cast<std::size_t>(idx[k])]; };
  return (1 - ty) * ((1 - tx) * v(0) + tx * v(1)) + ty * ((1 - tx) * v(2) + tx * v(3));
}

Session::Session(Scenario s) : s_(std::move(s)), nu_(s_.potential()) {}

GridPtr Session::grid() {
  if (!grid_) grid_ = make_grid(s_.domain, std::span<const int>(s_.resolution));
  return grid_;
}

const KernelMatrix& Session::kernel() {
  if (!kernel_) kernel_ = std::make_unique<KernelMatrix>(assemble(GreenKernel(s_.domain), grid()));
  return *kernel_;
}

const Classification& Session::classification() {
  if (!cls_) cls_ = classify_singular_set(nu_, kernel().kernel);
  return *cls_;
}

FredholmOptions Session::fredholm_options() const {
  FredholmOptions o;
  o.stop_early = s_.stop_early;
  o.factors = factors_;
  return o;
}

const SolveReport& Session::solution() {
  if (!solve_) solve_ = solve_duality(kernel(), nu_, s_.mu, s_.levels, fredholm_options());
  return *solve_;
}

double Session::mu_tv() {
  if (!tv_) tv_ = total_variation(s_.mu, s_.domain);
  return *tv_;
}

PotentialMeasure Session::final_potential() {
  const auto& levels = solution().truncation_levels;
  return levels.empty() ? nu_ : truncate(nu_, levels.back());
}

const StrongDuality& Session::strong_duality() {
  if (strong_) return *strong_;
  StrongDuality r;
  const GridFunction& u = solution().solution;
  const Grid& g = *grid();
  const KernelMatrix& k = kernel();
  const Classification& cls = classification();
  r.concentrated_mass = concentrated_mass_on(s_.mu, s_.domain, cls);
  r.expected = r.concentrated_mass == 0.0 ? "small" : "bounded-away";

  // The limit of u_n ν_n may concentrate on N_ν; only its part on E_ν
  // belongs to u·ν. The concentration sits in the core where the truncated
  // density is capped, so that core (never less than one cell) is left out
  // of the absorption term around each exceptional point.
  const double h = std::max(g.spacing[0], g.spacing[1]);
  const auto& levels = solution().truncation_levels;
  const double level = levels.empty() ? 0.0 : levels.back();
  auto core_radius = [&](const Point& x) {
    double rc = 0.0;
    for (const auto& sp : nu_.singular_points()) {
      if (level > 0.0 && distance(sp.at, x) < 1e-12 && sp.beta > 0.0)
        rc = std::max(rc, std::pow(std::abs(sp.coeff) / level, 1.0 / sp.beta));
    }
    return 2.0 * std::max(h, rc);
  };
  std::vector<double> m = potential_masses(final_potential(), s_.domain, g);
  for (const auto& p : cls.n_nu) {
    const double rad = core_radius(p);
    r.exclusion_radius = std::max(r.exclusion_radius, rad);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (distance(g.nodes[i], p) < rad) m[i] = 0.0;
    }
  }
  const std::vector<double> mu_mass = masses_or_zero(without_atoms(s_.mu), s_.domain, g);
  const double tv = mu_tv();
  for (const auto& beta : density_battery(s_.domain)) {
    const MeasureSpec b = MeasureSpec::function(beta.f);
    const GridFunction rb = apply_R(k, b);
    double lhs = pairing(u, beta.f);
    double rhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      lhs += u.values[i] * m[i] * rb.values[i];
      rhs += mu_mass[i] * rb.values[i];
    }
    for (const auto& a : s_.mu.atoms) rhs += a.weight * potential_at(k, b, a.at);
    r.absolute.push_back(std::abs(lhs - rhs));
    const double scale = tv * linf_norm(rb);
    r.residuals.push_back(scale > 0.0 ? std::abs(lhs - rhs) / scale : std::abs(lhs - rhs));
  }
  r.max_residual = *std::max_element(r.residuals.begin(), r.residuals.end());
  r.verdict = r.max_residual <= r.threshold ? "small" : "bounded-away";
  strong_ = r;
  return *strong_;
}

CheckRecord check_duality_pairing(Session& s) {
  const SolveReport& sol = s.solution();
  const GridFunction& u = sol.solution;
  const Domain& d = s.domain();
  const Grid& g = *s.grid();
  const auto battery = test_battery(d);
  const MeasureSpec& mu = s.scenario().mu;
  const double tv = s.mu_tv();
  const PathConfig& cfg = s.scenario().mc;

  const std::vector<double> mu_mass = masses_or_zero(without_atoms(mu), d, g);
  const bool has_spread = !without_atoms(mu).empty();

  // Ř^ν η at each atom from paths started there, all η on shared paths.
  std::vector<MeasureSpec> etas;
  for (const auto& t : battery) etas.push_back(MeasureSpec::function(t.f));
  std::vector<const MeasureSpec*> data;
  for (const auto& e : etas) data.push_back(&e);
  std::vector<std::vector<MCEstimate>> at_atoms;
  for (const auto& a : mu.atoms) {
    at_atoms.push_back(estimate_batch(d, a.at, {&s.nu().base()}, data, cfg).est[0]);
  }

  double atom_weight = 0.0;
  for (const auto& a : mu.atoms) atom_weight += std::abs(a.weight);

  Json rows = Json::array();
  double worst = 0.0;
  bool ok = true;
  for (std::size_t e = 0; e < battery.size(); ++e) {
    const double left = pairing(u, battery[e].f);
    double right = 0.0;
    if (has_spread) {
      const GridFunction w = solve_R_nu_eta(s.kernel(), s.nu(), battery[e].f, sol.truncation_levels, s.fredholm_options());
      for (std::size_t i = 0; i < g.size(); ++i) right += mu_mass[i] * w.values[i];
    }
    double var = 0.0;
    for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
      right += mu.atoms[a].weight * at_atoms[a][e].mean;
      var += std::pow(mu.atoms[a].weight * at_atoms[a][e].std_error, 2);
    }
    const double stat = 3.0 * std::sqrt(var);
    const double allowance = battery[e].sup * (1e-3 * tv + 2.0 * last_delta(sol) + atom_weight * mc_bias(cfg));
    const double tol = stat + allowance;
    const double diff = std::abs(left - right);
    if (!(diff <= tol)) ok = false;
    worst = std::max(worst, tol > 0.0 ? diff / tol : (diff > 0.0 ? INFINITY : 0.0));
    rows.push_back({{"eta", battery[e].name}, {"left", left}, {"right", right}, {"difference", diff},
                    {"three_stderr", stat}, {"allowance", allowance}});
  }
  CheckRecord c;
  c.name = "duality_pairing";
  c.status = ok ? "pass" : "fail";
  c.measured = worst;
  c.tolerance = 1.0;
  c.payload = {{"measured_is", "max |left-right| / tolerance over the battery"},
               {"atoms_by_monte_carlo", mu.atoms.size()},
               {"paths", cfg.n_paths},
               {"battery", rows}};
  return c;
}

CheckRecord check_strong_duality(Session& s) {
  const StrongDuality& r = s.strong_duality();
  CheckRecord c;
  c.name = "strong_duality";
  c.measured = r.max_residual;
  c.tolerance = r.threshold;
  c.status = r.verdict == r.expected ? "pass" : "fail";
  Json rows = Json::array();
  const auto battery = density_battery(s.domain());
  for (std::size_t i = 0; i < battery.size(); ++i) {
    rows.push_back({{"beta", battery[i].name},
                    {"relative_residual", r.residuals[i]},
                    {"absolute_residual", r.absolute[i]}});
  }
  c.payload = {{"expected", r.expected},
               {"verdict", r.verdict},
               {"concentrated_mass_on_n_nu", r.concentrated_mass},
               {"exclusion_radius", r.exclusion_radius},
               {"residuals", rows}};
  return c;
}

CheckRecord check_regularity(Session& s) {
  const GridFunction& u = s.solution().solution;
  const Grid& g = *s.grid();
  const double tv = s.mu_tv();
  const std::vector<double> m = potential_masses(s.final_potential(), s.domain(), g);

  double nu_mass = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) nu_mass += std::abs(u.values[i]) * m[i];
  const double bound_a = tv * (1 + 1e-2);

  const GridFunction r_abs = apply_R(s.kernel(), absolute(s.scenario().mu));
  std::size_t violations_b = 0;
  double worst_b = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double excess = std::abs(u.values[i]) - r_abs.values[i] * (1 + 1e-6);
    worst_b = std::max(worst_b, excess);
    if (excess > 0.0) ++violations_b;
  }

  const double r1_max = linf_norm(apply_R(s.kernel(), MeasureSpec::lebesgue()));
  const double l1 = l1_norm(u);
  const double bound_c = r1_max * tv * (1 + 1e-2);

  const auto tk = tk_energy_check(u, {0.01, 0.05, 0.1}, tv);
  std::size_t violations_tk = 0;
  Json tk_rows = Json::array();
  for (const auto& e : tk) {
    if (!e.ok) ++violations_tk;
    tk_rows.push_back({{"k", e.k}, {"energy", e.energy}, {"bound", e.bound * (1 + 1e-2)}, {"ok", e.ok}});
  }

  const std::size_t violations = (nu_mass > bound_a) + violations_b + (l1 > bound_c) + violations_tk;
  CheckRecord c;
  c.name = "regularity";
  c.status = violations == 0 ? "pass" : "fail";
  c.measured = static_cast<double>(violations);
  c.tolerance = 0.0;
  c.payload = {{"measured_is", "number of violated inequalities"},
               {"nu_integral", {{"value", nu_mass}, {"bound", bound_a}, {"slack", bound_a - nu_mass}}},
               {"pointwise_R_abs_mu", {{"violations", violations_b}, {"max_excess", worst_b}}},
               {"l1_norm", {{"value", l1}, {"bound", bound_c}, {"slack", bound_c - l1}}},
               {"truncation_energies", tk_rows}};
  return c;
}

CheckRecord check_existence_criterion(Session& s) {
  const StrongDuality& r = s.strong_duality();
  const bool criterion_exists = r.concentrated_mass == 0.0;
  const bool residual_exists = r.verdict == "small";
  CheckRecord c;
  c.name = "existence_criterion";
  c.status = criterion_exists == residual_exists ? "pass" : "fail";
  c.measured = r.concentrated_mass;
  c.tolerance = 0.0;
  Json pts = Json::array();
  for (const auto& p : s.classification().n_nu) pts.push_back(point_json(p));
  c.payload = {{"measured_is", "|mu_c|(N_nu)"},
               {"n_nu", pts},
               {"criterion", criterion_exists ? "strong-solution-exists" : "no-strong-solution"},
               {"residual_verdict", residual_exists ? "strong-solution-exists" : "no-strong-solution"},
               {"max_relative_residual", r.max_residual}};
  return c;
}

CheckRecord check_resolvent_identity(Session& s) {
  const auto& levels = s.solution().truncation_levels;
  const double r = resolvent_identity_residual(s.kernel(), s.nu(), [](const Point&) { return 1.0; }, levels,
                                               s.fredholm_options());
  const bool singular = !s.nu().singular_points().empty();
  return bounded("resolvent_identity", r, singular ? 1e-2 : 1e-3,
                 {{"measured_is", "relative L1 residual, eta = 1"}, {"singular_potential", singular}});
}

CheckRecord check_reduction_coherence(Session& s) {
  const SolveReport& full = s.solution();
  const MeasureSpec reduced = reduce(s.scenario().mu, s.classification());
  const SolveReport red = solve_duality(s.kernel(), s.nu(), reduced, s.scenario().levels, s.fredholm_options());
  const double dist = l1_distance(full.solution, red.solution);
  const double scale = l1_norm(apply_R(s.kernel(), absolute(s.scenario().mu)));
  const double tol = 1e-2 * scale + 2.0 * (last_delta(full) + last_delta(red));
  return bounded("reduction_coherence", dist, tol,
                 {{"measured_is", "L1 distance between solutions for mu and its reduction"},
                  {"atoms_removed", s.scenario().mu.atoms.size() - reduced.atoms.size()},
                  {"scale_l1_R_abs_mu", scale}});
}

CheckRecord check_classification(Session& s) {
  const Classification& cls = s.classification();
  Json rows = Json::array();
  std::size_t disagreements = 0;
  for (const auto& dgn : cls.diagnostics) {
    if (dgn.rule_divergent != dgn.numeric_divergent) ++disagreements;
    rows.push_back({{"at", point_json(dgn.at)},
                    {"beta", dgn.beta},
                    {"r0", dgn.r0},
                    {"rate", dgn.rate},
                    {"log_power", dgn.log_power},
                    {"rule_divergent", dgn.rule_divergent},
                    {"numeric_divergent", dgn.numeric_divergent},
                    {"shells", array_of(dgn.shells)}});
  }
  Json pts = Json::array();
  for (const auto& p : cls.n_nu) pts.push_back(point_json(p));
  return bounded("classification", static_cast<double>(disagreements), 0.0,
                 {{"measured_is", "rule/diagnostic disagreements"}, {"n_nu", pts}, {"diagnostics", rows}});
}

CheckRecord check_mc_probes(Session& s) {
  const GridFunction& u = s.solution().solution;
  const PathConfig& cfg = s.scenario().mc;
  Json rows = Json::array();
  double worst = 0.0;
  bool ok = true;
  for (const Point& x : s.scenario().probe_points()) {
    const BatchResult b = estimate_batch(s.domain(), x, {&s.nu().base()}, {&s.scenario().mu}, cfg);
    const MCEstimate& e = b.est[0][0];
    const double fred = interpolate(u, x);
    const double tol = 3.0 * e.std_error + 1e-3;
    const double diff = std::abs(e.mean - fred);
    if (!(diff <= tol)) ok = false;
    worst = std::max(worst, diff / tol);
    rows.push_back({{"x", point_json(x)},
                    {"monte_carlo", e.mean},
                    {"std_error", e.std_error},
                    {"fredholm", fred},
                    {"difference", diff},
                    {"tolerance", tol},
                    {"blowups", b.blowups[0]},
                    {"mean_exit_time", b.mean_exit_time}});
  }
  CheckRecord c;
  c.name = "mc_probes";
  c.status = ok ? "pass" : "fail";
  c.measured = worst;
  c.tolerance = 1.0;
  c.payload = {{"measured_is", "max |mc - fredholm| / (3 stderr + 1e-3)"},
               {"paths", cfg.n_paths},
               {"dt", cfg.dt},
               {"epsilon", cfg.epsilon()},
               {"seed", cfg.seed},
               {"probes", rows}};
  return c;
}

namespace {

std::vector<MollifiedStep> mollified(Session& s) {
  return mollify_and_solve(s.domain(), s.grid(), s.final_potential(), s.scenario().mu, s.scenario().mollifier,
                           1e-10, s.solution().solution);
}

Json ladder_rows(const std::vector<MollifiedStep>& steps) {
  Json rows = Json::array();
  for (const auto& st : steps) {
    rows.push_back({{"n", st.n},
                    {"mollified_mass", st.mollified_mass},
                    {"l1_to_previous", st.l1_to_previous},
                    {"l1_to_fredholm", st.l1_to_reference},
                    {"cg_iterations", st.report.iterations},
                    {"kkt_residual", st.report.kkt_residual}});
  }
  return rows;
}

}  // namespace

CheckRecord check_variational_agreement(Session& s) {
  const auto steps = mollified(s);
  const double tol = 1e-2 * std::max(s.mu_tv(), 1e-300);
  const double last = steps.empty() ? 0.0 : steps.back().l1_to_reference;
  return bounded("variational_agreement", last, tol,
                 {{"measured_is", "L1 distance of the last mollified variational solution to the Fredholm solution"},
                  {"ladder", ladder_rows(steps)}});
}

CheckRecord check_mollification_ladder(Session& s) {
  const auto steps = mollified(s);
  std::size_t increases = 0;
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].l1_to_reference > steps[i - 1].l1_to_reference) ++increases;
  }
  return bounded("mollification_ladder", static_cast<double>(increases), 0.0,
                 {{"measured_is", "rungs where the L1 distance to the Fredholm solution grew"},
                  {"ladder", ladder_rows(steps)}});
}

CheckRecord check_truncation_ladder(Session& s) {
  const SolveReport& r = s.solution();
  CheckRecord c;
  c.name = "truncation_ladder";
  c.status = "info";
  c.measured = last_delta(r);
  c.tolerance = 0.0;
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.truncation_levels.size(); ++i) {
    rows.push_back({{"level", r.truncation_levels[i]},
                    {"l1_delta", i == 0 ? Json(nullptr) : Json(r.l1_deltas[i - 1])},
                    {"linf", linf_norm(r.ladder[i])}});
  }
  c.payload = {{"measured_is", "last L1 delta"},
               {"method", r.method},
               {"stop_reason", r.stop_reason},
               {"nu_mass_of_u", r.nu_mass_of_u},
               {"levels", rows}};
  return c;
}

CheckRecord run_check(Session& s, const std::string& name) {
  try {
    if (name == "duality_pairing") return check_duality_pairing(s);
    if (name == "strong_duality") return check_strong_duality(s);
    if (name == "regularity") return check_regularity(s);
    if (name == "existence_criterion") return check_existence_criterion(s);
    if (name == "resolvent_identity") return check_resolvent_identity(s);
    if (name == "reduction_coherence") return check_reduction_coherence(s);
    if (name == "classification") return check_classification(s);
    if (name == "mc_probes") return check_mc_probes(s);
    if (name == "variational_agreement") return check_variational_agreement(s);
    if (name == "truncation_ladder") return check_truncation_ladder(s);
    if (name == "mollification_ladder") return check_mollification_ladder(s);
    throw Error("unknown-check", name);
  } catch (const Error& e) {
    CheckRecord c;
    c.name = name;
    c.status = "fail";
    c.measured = INFINITY;
    c.payload = {{"error", e.code()}, {"message", e.what()}};
    return c;
  } catch (const std::exception& e) {
    CheckRecord c;
    c.name = name;
    c.status = "fail";
    c.measured = INFINITY;
    c.payload = {{"error", "exception"}, {"message", e.what()}};
    return c;
  }
}

}  // namespace smeq
