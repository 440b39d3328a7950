#include "smeq/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "smeq/error.hpp"
#include "smeq/green_kernel.hpp"
#include "smeq/quadrature.hpp"

namespace smeq {

namespace {

double inv_pow(double r, double beta) {
  if (beta == 0.0) return 1.0;
  if (beta == 0.5) return 1.0 / std::sqrt(r);
  if (beta == 1.0) return 1.0 / r;
  if (beta == 1.5) return 1.0 / (r * std::sqrt(r));
  if (beta == 2.0) return 1.0 / (r * r);
  return std::pow(r, -beta);
}

Point shifted(const Point& base, const Point& off) {
  Point x = base;
  x[0] += off[0];
  x[1] += off[1];
  return x;
}

bool same_point(const Point& a, const Point& b) {
  return a.dim == b.dim && distance(a, b) <= 1e-12 * (1.0 + norm(a));
}

}  // namespace

double DensityTerm::operator()(const Point& x) const {
  double v = coeff;
  for (const auto& f : factors) v *= inv_pow(distance(x, f.center), f.beta);
  if (fn) v *= fn(x);
  return v;
}

double DensityTerm::at(const Point& base, const Point& off) const {
  double v = coeff;
  for (const auto& f : factors) {
    const double dx = (base[0] - f.center[0]) + off[0];
    const double dy = (base[1] - f.center[1]) + off[1];
    v *= inv_pow(std::hypot(dx, dy), f.beta);
  }
  if (fn) v *= fn(shifted(base, off));
  return v;
}

double CurveComponent::length() const {
  if (auto* c = std::get_if<Circle>(&support)) return 2.0 * std::numbers::pi * c->radius;
  const auto& s = std::get<Segment>(support);
  return distance(s.p, s.q);
}

Point CurveComponent::at(double s) const {
  if (auto* c = std::get_if<Circle>(&support)) {
    const double t = s / c->radius;
    return Point(c->center[0] + c->radius * std::cos(t), c->center[1] + c->radius * std::sin(t));
  }
  const auto& g = std::get<Segment>(support);
  const double len = distance(g.p, g.q);
  const double t = len > 0.0 ? s / len : 0.0;
  return Point(g.p[0] + t * (g.q[0] - g.p[0]), g.p[1] + t * (g.q[1] - g.p[1]));
}

double CurveComponent::nearest_parameter(const Point& x) const {
  if (auto* c = std::get_if<Circle>(&support)) {
    double t = std::atan2(x[1] - c->center[1], x[0] - c->center[0]);
    if (t < 0.0) t += 2.0 * std::numbers::pi;
    return t * c->radius;
  }
  const auto& g = std::get<Segment>(support);
  const double len = distance(g.p, g.q);
  if (!(len > 0.0)) return 0.0;
  const double ux = (g.q[0] - g.p[0]) / len, uy = (g.q[1] - g.p[1]) / len;
  const double s = (x[0] - g.p[0]) * ux + (x[1] - g.p[1]) * uy;
  return std::clamp(s, 0.0, len);
}

double CurveComponent::distance_to(const Point& x) const {
  if (auto* c = std::get_if<Circle>(&support)) return std::abs(distance(x, c->center) - c->radius);
  return distance(x, at(nearest_parameter(x)));
}

MeasureSpec MeasureSpec::lebesgue(double c) {
  MeasureSpec m;
  m.density.push_back(DensityTerm{c, {}, {}});
  return m;
}

MeasureSpec MeasureSpec::dirac(const Point& x, double weight) {
  MeasureSpec m;
  m.atoms.push_back({x, weight});
  return m;
}

MeasureSpec MeasureSpec::function(std::function<double(const Point&)> f) {
  MeasureSpec m;
  m.density.push_back(DensityTerm{1.0, {}, std::move(f)});
  return m;
}

MeasureSpec MeasureSpec::power(const Point& center, double beta, double coeff) {
  MeasureSpec m;
  m.density.push_back(DensityTerm{coeff, {PowerFactor{center, beta}}, {}});
  return m;
}

double MeasureSpec::density_at(const Point& x) const {
  double v = 0.0;
  for (const auto& t : density) v += t(x);
  v = std::min(v, density_cap);
  return multiplier ? v * multiplier(x) : v;
}

double MeasureSpec::density_at(const Point& base, const Point& off) const {
  double v = 0.0;
  for (const auto& t : density) v += t.at(base, off);
  v = std::min(v, density_cap);
  return multiplier ? v * multiplier(shifted(base, off)) : v;
}

std::optional<double> MeasureSpec::constant_density() const {
  if (multiplier) return std::nullopt;
  double c = 0.0;
  for (const auto& t : density) {
    if (!t.is_constant()) return std::nullopt;
    c += t.coeff;
  }
  return std::min(c, density_cap);
}

std::vector<Point> MeasureSpec::singular_centers() const {
  std::vector<Point> out;
  for (const auto& t : density) {
    for (const auto& f : t.factors) {
      if (f.beta <= 0.0) continue;
      if (std::none_of(out.begin(), out.end(), [&](const Point& p) { return same_point(p, f.center); }))
        out.push_back(f.center);
    }
  }
  return out;
}

MeasureSpec& MeasureSpec::operator+=(const MeasureSpec& o) {
  if (std::isfinite(density_cap) || std::isfinite(o.density_cap) || multiplier || o.multiplier)
    throw Error("invalid-argument", "cannot add truncated or weighted measures");
  density.insert(density.end(), o.density.begin(), o.density.end());
  atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end());
  curves.insert(curves.end(), o.curves.begin(), o.curves.end());
  return *this;
}

MeasureSpec operator+(MeasureSpec a, const MeasureSpec& b) {
  a += b;
  return a;
}

MeasureSpec MeasureSpec::times(const std::function<double(const Point&)>& f) const {
  MeasureSpec m;
  m.density = density;
  m.density_cap = density_cap;
  if (multiplier) {
    auto g = multiplier;
    m.multiplier = [g, f](const Point& x) { return g(x) * f(x); };
  } else {
    m.multiplier = f;
  }
  for (const auto& a : atoms) m.atoms.push_back({a.at, a.weight * f(a.at)});
  for (const auto& c : curves) {
    CurveComponent cc = c;
    const DensityTerm g = c.density;
    cc.density = DensityTerm{1.0, {}, [g, f](const Point& x) { return g(x) * f(x); }};
    m.curves.push_back(std::move(cc));
  }
  return m;
}

PotentialMeasure::PotentialMeasure(MeasureSpec base, int dimension)
    : PotentialMeasure(base, {}, dimension) {
  // Singular points from power factors: the strongest exponent at each centre wins.
  for (const auto& t : base_.density) {
    std::vector<SingularPoint> local;
    for (const auto& f : t.factors) {
      if (f.beta <= 0.0) continue;
      auto it = std::find_if(local.begin(), local.end(),
                             [&](const SingularPoint& s) { return same_point(s.at, f.center); });
      if (it == local.end()) {
        local.push_back({f.center, f.beta, t.coeff});
      } else {
        it->beta += f.beta;
      }
    }
    for (auto& s : local) {
      // Coefficient: the remaining factors evaluated at the centre.
      double c = t.coeff;
      for (const auto& f : t.factors) {
        if (!same_point(f.center, s.at)) c *= inv_pow(distance(s.at, f.center), f.beta);
      }
      if (t.fn) c *= t.fn(s.at);
      s.coeff = c;
      auto it = std::find_if(singular_.begin(), singular_.end(),
                             [&](const SingularPoint& o) { return same_point(o.at, s.at); });
      if (it == singular_.end()) {
        singular_.push_back(s);
      } else if (s.beta > it->beta) {
        *it = s;
      } else if (s.beta == it->beta) {
        it->coeff += s.coeff;
      }
    }
  }
}

PotentialMeasure::PotentialMeasure(MeasureSpec base, std::vector<SingularPoint> singular,
                                   int dimension)
    : base_(std::move(base)), singular_(std::move(singular)), dim_(dimension) {
  if (dim_ != 1 && dim_ != 2) throw Error("invalid-potential", "dimension must be 1 or 2");
  for (const auto& t : base_.density) {
    if (t.coeff < 0.0) throw Error("invalid-potential", "potential density must be nonnegative");
    for (const auto& f : t.factors) {
      if (f.center.dim != dim_) throw Error("dimension-mismatch", "singular centre " + to_string(f.center));
    }
  }
  for (const auto& a : base_.atoms) {
    if (a.weight < 0.0) throw Error("invalid-potential", "potential atoms must be nonnegative");
    if (a.at.dim != dim_) throw Error("dimension-mismatch", "atom " + to_string(a.at));
    if (dim_ == 2) {
      throw Error("non-smooth-potential",
                  "atom at " + to_string(a.at) + " charges a polar set in dimension 2");
    }
  }
  for (const auto& c : base_.curves) {
    if (dim_ == 1) throw Error("invalid-potential", "curve components need a 2D domain");
    if (c.density.coeff < 0.0) throw Error("invalid-potential", "curve density must be nonnegative");
  }
  for (const auto& s : singular_) {
    if (s.at.dim != dim_) throw Error("dimension-mismatch", "singular point " + to_string(s.at));
    if (s.coeff < 0.0) throw Error("invalid-potential", "singular coefficient must be nonnegative");
  }
}

bool Classification::in_n_nu(const Point& x) const {
  return std::any_of(n_nu.begin(), n_nu.end(), [&](const Point& p) { return same_point(p, x); });
}

void check_supported(const MeasureSpec& m, const Domain& d, const std::string& what) {
  const int dim = d.dimension();
  for (const auto& t : m.density) {
    for (const auto& f : t.factors) {
      if (f.center.dim != dim) throw Error("dimension-mismatch", what + ": density centre " + to_string(f.center));
    }
  }
  for (const auto& a : m.atoms) {
    d.check_dimension(a.at);
    if (!contains(d, a.at)) throw Error("outside-domain", what + ": atom " + to_string(a.at) + " is not interior");
  }
  for (const auto& c : m.curves) {
    if (dim != 2) throw Error("dimension-mismatch", what + ": curves need a 2D domain");
    const double len = c.length();
    if (!(len > 0.0)) throw Error("invalid-measure", what + ": degenerate curve");
    for (int k = 0; k <= 64; ++k) {
      if (!contains(d, c.at(len * k / 64.0))) {
        throw Error("outside-domain", what + ": curve support leaves the domain");
      }
    }
  }
}

double total_variation(const MeasureSpec& m, const Domain& d) {
  const int dim = d.dimension();
  double tv = 0.0;
  if (m.has_density()) {
    for (const auto& t : m.density) {
      // Local exponent at each centre; integrable iff below the dimension.
      for (const auto& f : t.factors) {
        double beta = 0.0;
        for (const auto& g : t.factors) {
          if (same_point(g.center, f.center)) beta += g.beta;
        }
        const bool capped = std::isfinite(m.density_cap) && t.coeff >= 0.0;
        if (beta >= dim && !capped && d.signed_boundary_distance(f.center) >= 0.0) {
          throw Error("not-bounded-measure",
                      "density is not integrable near " + to_string(f.center));
        }
      }
    }
    if (auto c = m.constant_density()) {
      tv += std::abs(*c) * d.volume();
    } else {
      const auto centers = m.singular_centers();
      tv += quad::over_domain(
          d, [&](const Point& b, const Point& o) { return std::abs(m.density_at(b, o)); }, centers,
          1e-8);
    }
  }
  for (const auto& a : m.atoms) tv += std::abs(a.weight);
  for (const auto& c : m.curves) {
    for (const auto& s : sample_curve(c, c.length() / 256.0)) tv += std::abs(s.weight);
  }
  return tv;
}

Decomposition decompose(const MeasureSpec& m, const Domain& d) {
  Decomposition out;
  if (d.dimension() == 1) {
    out.diffuse = m;
    return out;
  }
  out.diffuse = m;
  out.diffuse.atoms.clear();
  out.concentrated.atoms = m.atoms;
  return out;
}

MeasureSpec reduce(const MeasureSpec& m, const Classification& c) {
  MeasureSpec out = m;
  out.atoms.clear();
  for (const auto& a : m.atoms) {
    if (!c.in_n_nu(a.at)) out.atoms.push_back(a);
  }
  return out;
}

double concentrated_mass_on(const MeasureSpec& m, const Domain& d, const Classification& c) {
  const Decomposition parts = decompose(m, d);
  double s = 0.0;
  for (const auto& a : parts.concentrated.atoms) {
    if (c.in_n_nu(a.at)) s += std::abs(a.weight);
  }
  return s;
}

PotentialMeasure truncate(const PotentialMeasure& nu, double level) {
  if (!(level > 0.0)) throw Error("invalid-argument", "truncation level must be positive");
  MeasureSpec base = nu.base();
  base.density_cap = std::min(base.density_cap, level);
  return PotentialMeasure(std::move(base), nu.singular_points(), nu.dimension());
}

namespace {

// Shell integrals about x: s_k over r_{k+1} < |y - x| <= r_k, r_k = r0 2^-k.
std::vector<double> shell_integrals(const GreenKernel& k, const MeasureSpec& m, const Point& x,
                                    double r0, int count) {
  const auto& rule = quad::gauss_legendre(16);
  const int dim = k.domain().dimension();
  constexpr int n_theta = 64;
  std::vector<double> shells;
  for (int s = 0; s < count; ++s) {
    const double hi = std::log(r0) - s * std::numbers::ln2;
    const double lo = hi - std::numbers::ln2;
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    double total = 0.0;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const double r = std::exp(mid + half * rule.x[q]);
      double ring = 0.0;
      if (dim == 1) {
        for (double sign : {-1.0, 1.0}) {
          const Point off(sign * r);
          ring += k.near(x, off) * m.density_at(x, off);
        }
        ring *= r;  // dr = r dt
      } else {
        for (int t = 0; t < n_theta; ++t) {
          const double th = 2.0 * std::numbers::pi * (t + 0.5) / n_theta;
          const Point off(r * std::cos(th), r * std::sin(th));
          ring += k.near(x, off) * m.density_at(x, off);
        }
        ring *= 2.0 * std::numbers::pi / n_theta * r * r;
      }
      total += rule.w[q] * half * ring;
    }
    shells.push_back(total);
  }
  return shells;
}

constexpr int kShells = 48;  // s_0 .. s_47
constexpr int kEarly = 23;
constexpr int kLate = 46;
constexpr double kRateTol = 0.03;

std::string table(const Classification& c) {
  std::ostringstream os;
  os.precision(6);
  for (const auto& d : c.diagnostics) {
    os << "\n  point " << to_string(d.at) << " beta=" << d.beta << " r0=" << d.r0
       << " rate=" << d.rate << " log_power=" << d.log_power
       << " rule=" << (d.rule_divergent ? "divergent" : "finite")
       << " numeric=" << (d.numeric_divergent ? "divergent" : "finite") << " shells:";
    for (std::size_t k = 0; k < d.shells.size(); k += 6) os << " s" << k << "=" << d.shells[k];
  }
  return os.str();
}

}  // namespace

Classification classify_singular_set(const PotentialMeasure& nu, const GreenKernel& k) {
  const Domain& d = k.domain();
  const int dim = d.dimension();
  if (nu.dimension() != dim) throw Error("dimension-mismatch", "potential and kernel dimensions differ");
  Classification out;

  std::vector<Point> sites;
  for (const auto& s : nu.singular_points()) sites.push_back(s.at);
  for (const auto& a : nu.base().atoms) sites.push_back(a.at);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (!contains(d, sites[i])) throw Error("outside-domain", "singular point " + to_string(sites[i]));
    for (std::size_t j = 0; j < i; ++j) {
      if (same_point(sites[i], sites[j]) && i < nu.singular_points().size())
        throw Error("invalid-potential", "singular points must be distinct");
    }
  }

  // Atoms only occur in 1D, where G is bounded: always in E_nu.
  MeasureSpec density_only = nu.base();
  density_only.atoms.clear();
  density_only.curves.clear();

  for (std::size_t j = 0; j < nu.singular_points().size(); ++j) {
    const auto& sp = nu.singular_points()[j];
    ShellDiagnostic diag;
    diag.at = sp.at;
    diag.beta = sp.beta;
    double sep = boundary_distance(d, sp.at);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (i != j && !same_point(sites[i], sp.at)) sep = std::min(sep, distance(sites[i], sp.at));
    }
    diag.r0 = 0.5 * sep;
    diag.shells = shell_integrals(k, density_only, sp.at, diag.r0, kShells);
    diag.ball_tail.assign(diag.shells.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = diag.shells.size(); i-- > 0;) {
      acc += diag.shells[i];
      diag.ball_tail[i] = acc;
    }

    diag.rule_divergent = !nu.is_truncated() && sp.coeff > 0.0 && sp.beta >= dim;

    auto rate = [&](int i) {
      const double a = diag.shells[static_cast<std::size_t>(i)];
      const double b = diag.shells[static_cast<std::size_t>(i + 1)];
      if (!(a > 0.0) || !(b > 0.0)) return std::numeric_limits<double>::infinity();
      return std::log2(a / b);
    };
    const double p1 = rate(kEarly), p2 = rate(kLate);
    if (std::isfinite(p1) && std::isfinite(p2)) {
      // s_k ~ 2^{-gamma k} k^m gives p_k = gamma - m/(k ln 2) + O(k^-2); the
      // doubled index removes the 1/k term.
      diag.rate = 2.0 * p2 - p1;
      diag.log_power = kLate * (p2 - p1) * std::numbers::ln2;
      diag.numeric_divergent =
          diag.rate < -kRateTol || (std::abs(diag.rate) <= kRateTol && diag.log_power >= -1.0);
    } else {
      diag.rate = std::numeric_limits<double>::infinity();
      diag.numeric_divergent = false;
    }
    out.diagnostics.push_back(std::move(diag));
  }

  for (const auto& dg : out.diagnostics) {
    if (dg.rule_divergent != dg.numeric_divergent) {
      throw Error("rule-diagnostic-disagreement", "analytic rule and shell diagnostic differ:" + table(out));
    }
    if (dg.rule_divergent) out.n_nu.push_back(dg.at);
  }
  return out;
}

std::vector<CurveSample> sample_curve(const CurveComponent& c, double spacing) {
  const double len = c.length();
  const auto& rule = quad::gauss_legendre(8);
  const int panels = std::max(8, static_cast<int>(std::ceil(len / std::max(spacing, 1e-12))));
  const double h = len / panels;
  std::vector<CurveSample> out;
  out.reserve(static_cast<std::size_t>(panels) * rule.x.size());
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t q = 0; q < rule.x.size(); ++q) {
      const Point x = c.at(mid + 0.5 * h * rule.x[q]);
      out.push_back({x, 0.5 * h * rule.w[q] * c.density(x)});
    }
  }
  return out;
}

std::vector<double> lumped_masses(const MeasureSpec& m, const Domain& d, const Grid& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (m.has_density()) {
    if (auto c = m.constant_density()) {
      for (std::size_t i = 0; i < n; ++i) out[i] = *c * g.weights[i];
    } else {
      const auto centers = m.singular_centers();
      const quad::LocalFn f = [&](const Point& b, const Point& o) { return m.density_at(b, o); };
      for (std::size_t i = 0; i < n; ++i) out[i] = quad::over_cell(d, g.cell(i), f, centers);
    }
  }

  for (const auto& a : m.atoms) {
    if (g.dim == 1) {
      const double t = (a.at[0] - g.origin[0]) / g.spacing[0] - 0.5;
      const int i0 = static_cast<int>(std::floor(t));
      const double frac = t - i0;
      if (i0 >= 0 && i0 < g.resolution[0]) out[static_cast<std::size_t>(i0)] += (1.0 - frac) * a.weight;
      if (i0 + 1 >= 0 && i0 + 1 < g.resolution[0]) out[static_cast<std::size_t>(i0 + 1)] += frac * a.weight;
      continue;
    }
    const double tx = (a.at[0] - g.origin[0]) / g.spacing[0] - 0.5;
    const double ty = (a.at[1] - g.origin[1]) / g.spacing[1] - 0.5;
    const int ix = static_cast<int>(std::floor(tx));
    const int iy = static_cast<int>(std::floor(ty));
    const double fx = tx - ix, fy = ty - iy;
    const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
    const int cells[4][2] = {{ix, iy}, {ix + 1, iy}, {ix, iy + 1}, {ix + 1, iy + 1}};
    for (int c = 0; c < 4; ++c) {
      const int node = g.node_of_cell(cells[c][0], cells[c][1]);
      if (node >= 0) out[static_cast<std::size_t>(node)] += wts[c] * a.weight;
    }
  }

  const double h = std::min(g.spacing[0], g.dim == 2 ? g.spacing[1] : g.spacing[0]);
  for (const auto& c : m.curves) {
    for (const auto& s : sample_curve(c, 0.5 * h)) {
      const auto idx = g.cell_index_of(s.at);
      int node = g.node_of_cell(idx[0], idx[1]);
      if (node < 0) node = static_cast<int>(g.nearest_node(s.at));
      out[static_cast<std::size_t>(node)] += s.weight;
    }
  }
  return out;
}

}  // namespace smeq
