#include "smeq/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "smeq/error.hpp"

namespace smeq::quad {

LocalFn local(std::function<double(const Point&)> f) {
  return [f = std::move(f)](const Point& base, const Point& off) {
    Point x = base;
    x[0] += off[0];
    x[1] += off[1];
    return f(x);
  };
}

namespace {

template <unsigned N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  Rule r;
  const auto& xs = G::abscissa();
  const auto& ws = G::weights();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    r.x.push_back(-xs[k]);
    r.w.push_back(ws[k]);
    r.x.push_back(xs[k]);
    r.w.push_back(ws[k]);
  }
  return r;
}

// Non-const because boost 1.74 declares integrate() const but defines it
// without the qualifier; one instance per thread since it grows tables lazily.
// Refinements are capped: a kink (e.g. a truncation level) defeats tanh-sinh,
// and the fallback below handles it far more cheaply.
boost::math::quadrature::tanh_sinh<double>& ts() {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(8);
  return integrator;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static const Rule r2 = make_rule<2>();
  static const Rule r4 = make_rule<4>();
  static const Rule r8 = make_rule<8>();
  static const Rule r16 = make_rule<16>();
  static const Rule r32 = make_rule<32>();
  switch (n) {
    case 2: return r2;
    case 4: return r4;
    case 8: return r8;
    case 16: return r16;
    case 32: return r32;
    default: throw Error("invalid-argument", "unsupported Gauss rule size");
  }
}

namespace {

// Gauss-16 bisection: accept the halves when they agree with the parent to
// within tol_per_length times the interval length.
double gl16(const std::function<double(double)>& g, double a, double b) {
  static const Rule& r = gauss_legendre(16);
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double s = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * g(m + h * r.x[i]);
  return s * h;
}

double bisect(const std::function<double(double)>& g, double a, double b, double whole,
              double tol_per_length, int depth) {
  const double m = 0.5 * (a + b);
  const double left = gl16(g, a, m), right = gl16(g, m, b);
  if (std::abs(left + right - whole) <= tol_per_length * (b - a) || depth == 0) return left + right;
  return bisect(g, a, m, left, tol_per_length, depth - 1) + bisect(g, m, b, right, tol_per_length, depth - 1);
}

}  // namespace

double radial(const std::function<double(double)>& g, double r_max, double rel_tol) {
  if (!(r_max > 0.0)) return 0.0;
  // At abscissas near 1e-300 an integrable r^-s can still overflow; the mass
  // there is below r^{1-s} and is dropped.
  const auto safe = [&g](double r) {
    const double v = g(r);
    return std::isfinite(v) ? v : 0.0;
  };
  double err = 0.0, l1 = 0.0;
  double v = 0.0;
  bool ok = true;
  try {
    // Lower limit exactly 0 keeps the tiny abscissas accurate inside boost.
    v = ts().integrate(safe, 0.0, r_max, rel_tol, &err, &l1);
  } catch (const std::exception&) {
    ok = false;
  }
  if (ok && std::isfinite(v) && err <= std::max(rel_tol * l1, 1e-300)) return v;

  // Geometric panels toward 0 with Gauss-Kronrod bisection on each against an
  // absolute budget; the innermost piece goes back to tanh-sinh where the
  // integrand is smooth in log r.
  constexpr int panels = 48;
  const double inner = r_max * std::ldexp(1.0, -panels);
  std::vector<double> coarse(panels);
  double scale = std::abs(ts().integrate(safe, 0.0, inner, rel_tol));
  double total = scale;
  for (int k = 0; k < panels; ++k) {
    const double a = std::ldexp(inner, k);
    coarse[static_cast<std::size_t>(k)] = gl16(safe, a, 2.0 * a);
    scale += std::abs(coarse[static_cast<std::size_t>(k)]);
  }
  const double per_length = rel_tol * std::max(scale, ok ? l1 : 0.0) / r_max;
  for (int k = 0; k < panels; ++k) {
    const double a = std::ldexp(inner, k);
    total += bisect(safe, a, 2.0 * a, coarse[static_cast<std::size_t>(k)], per_length, 40);
  }
  return total;
}

double adaptive(const std::function<double(double)>& g, double a, double b, double rel_tol,
                unsigned max_depth) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, a, b, max_depth,
                                                                      rel_tol);
}

double segment(const LocalFn& f, double p, double q, std::span<const Point> centers,
               double rel_tol) {
  if (!(q > p)) return 0.0;
  std::vector<double> cuts{p, q};
  for (const auto& c : centers) {
    if (c[0] > p && c[0] < q) cuts.push_back(c[0]);
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double lo = cuts[k];
    const double hi = cuts[k + 1];
    const double half = 0.5 * (hi - lo);
    if (!(half > 0.0)) continue;
    const Point left(lo), right(hi);
    total += radial([&](double r) { return f(left, Point(r)); }, half, rel_tol);
    total += radial([&](double r) { return f(right, Point(-r)); }, half, rel_tol);
  }
  return total;
}

namespace {

std::vector<double> corner_angles(const Point& c, const Box& box) {
  std::vector<double> a;
  for (double x : {box.lo[0], box.hi[0]}) {
    for (double y : {box.lo[1], box.hi[1]}) {
      const double dx = x - c[0], dy = y - c[1];
      if (dx == 0.0 && dy == 0.0) continue;
      double t = std::atan2(dy, dx);
      if (t < 0.0) t += 2.0 * std::numbers::pi;
      a.push_back(t);
    }
  }
  return a;
}

// Integral over the star-shaped region {c + r e(t): 0 <= r < exit(t)}.
double polar(const Point& c, const std::function<double(double)>& exit_radius,
             const LocalFn& f, std::vector<double> breaks, double rel_tol) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  breaks.push_back(0.0);
  breaks.push_back(two_pi);
  std::sort(breaks.begin(), breaks.end());
  auto inner = [&](double t) {
    const double ct = std::cos(t), st = std::sin(t);
    const double rmax = exit_radius(t);
    return radial([&](double r) { return f(c, Point(r * ct, r * st)) * r; }, rmax, rel_tol);
  };
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (breaks[k + 1] - breaks[k] > 1e-14) {
      total += adaptive(inner, breaks[k], breaks[k + 1], rel_tol, 12);
    }
  }
  return total;
}

Point domain_centre(const Domain& d) {
  const Box b = d.bounding_box();
  if (d.dimension() == 1) return Point(0.5 * (b.lo[0] + b.hi[0]));
  return Point(0.5 * (b.lo[0] + b.hi[0]), 0.5 * (b.lo[1] + b.hi[1]));
}

}  // namespace

double over_domain(const Domain& d, const LocalFn& f, std::span<const Point> centers,
                   double rel_tol) {
  const Box bb = d.bounding_box();
  if (d.dimension() == 1) return segment(f, bb.lo[0], bb.hi[0], centers, rel_tol);

  std::vector<Point> cs;
  for (const auto& c : centers) {
    if (contains(d, c) && std::find(cs.begin(), cs.end(), c) == cs.end()) cs.push_back(c);
  }
  if (cs.empty()) cs.push_back(domain_centre(d));
  const bool is_rect = std::holds_alternative<Rectangle>(d.shape());

  double total = 0.0;
  for (std::size_t j = 0; j < cs.size(); ++j) {
    const Point cj = cs[j];
    LocalFn piece = f;
    std::vector<double> breaks;
    if (is_rect) breaks = corner_angles(cj, bb);
    if (cs.size() > 1) {
      piece = [&, j](const Point& base, const Point& off) {
        const double dj2 = off[0] * off[0] + off[1] * off[1];
        double s = 1.0;
        for (std::size_t l = 0; l < cs.size(); ++l) {
          if (l == j) continue;
          const double dx = base[0] - cs[l][0] + off[0];
          const double dy = base[1] - cs[l][1] + off[1];
          s += dj2 / (dx * dx + dy * dy);
        }
        const double v = f(base, off);
        return v == 0.0 ? 0.0 : v / s;
      };
      for (std::size_t l = 0; l < cs.size(); ++l) {
        if (l == j) continue;
        double t = std::atan2(cs[l][1] - cj[1], cs[l][0] - cj[0]);
        if (t < 0.0) t += 2.0 * std::numbers::pi;
        breaks.push_back(t);
      }
    }
    auto exit_r = [&](double t) { return d.ray_exit(cj, Point(std::cos(t), std::sin(t))); };
    total += polar(cj, exit_r, piece, breaks, rel_tol);
  }
  return total;
}

namespace {

double box_exit(const Box& b, const Point& c, double ct, double st) {
  double t = std::numeric_limits<double>::infinity();
  const double dir[2] = {ct, st};
  for (int k = 0; k < 2; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (dir[k] > 0.0) t = std::min(t, (b.hi[kk] - c[k]) / dir[k]);
    if (dir[k] < 0.0) t = std::min(t, (b.lo[kk] - c[k]) / dir[k]);
  }
  return std::max(0.0, t);
}

bool inside_box(const Box& b, const Point& p) {
  return p[0] >= b.lo[0] && p[0] <= b.hi[0] && p[1] >= b.lo[1] && p[1] <= b.hi[1];
}

double box_gap(const Box& b, const Point& p) {
  const double dx = std::max({b.lo[0] - p[0], 0.0, p[0] - b.hi[0]});
  const double dy = std::max({b.lo[1] - p[1], 0.0, p[1] - b.hi[1]});
  return std::hypot(dx, dy);
}

double gauss_box(const Domain& d, const Box& b, const LocalFn& f) {
  const RegionMoments m = d.clipped_moments(b);
  if (!(m.area > 0.0)) return 0.0;
  const Rule& r = gauss_legendre(4);
  const double hx = 0.5 * (b.hi[0] - b.lo[0]), hy = 0.5 * (b.hi[1] - b.lo[1]);
  const double mx = 0.5 * (b.hi[0] + b.lo[0]), my = 0.5 * (b.hi[1] + b.lo[1]);
  const double full = 4.0 * hx * hy;
  const Point zero(0.0, 0.0);
  if (m.area >= full * (1.0 - 1e-12)) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      for (std::size_t k = 0; k < r.x.size(); ++k) {
        s += r.w[i] * r.w[k] * f(Point(mx + hx * r.x[i], my + hy * r.x[k]), zero);
      }
    }
    return s * hx * hy;
  }
  // Cut leaf: mean over the Gauss points that fall inside, times clipped area.
  double s = 0.0, wsum = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    for (std::size_t k = 0; k < r.x.size(); ++k) {
      const Point p(mx + hx * r.x[i], my + hy * r.x[k]);
      if (!contains(d, p)) continue;
      s += r.w[i] * r.w[k] * f(p, zero);
      wsum += r.w[i] * r.w[k];
    }
  }
  if (wsum > 0.0) return m.area * s / wsum;
  return m.area * f(Point(m.mx / m.area, m.my / m.area), zero);
}

double quadtree(const Domain& d, const Box& b, const LocalFn& f, std::span<const Point> centers,
                int depth) {
  const double diag = std::hypot(b.hi[0] - b.lo[0], b.hi[1] - b.lo[1]);
  bool refine = false;
  if (depth > 0) {
    for (const auto& c : centers) {
      if (box_gap(b, c) < diag) refine = true;
    }
    // Boundary-cut leaves get a few extra levels.
    if (!refine && depth > 10) {
      const RegionMoments m = d.clipped_moments(b);
      const double full = (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]);
      refine = m.area > 0.0 && m.area < full * (1.0 - 1e-12);
    }
  }
  if (!refine) return gauss_box(d, b, f);
  const double mx = 0.5 * (b.lo[0] + b.hi[0]), my = 0.5 * (b.lo[1] + b.hi[1]);
  double s = 0.0;
  s += quadtree(d, Box{{b.lo[0], b.lo[1]}, {mx, my}}, f, centers, depth - 1);
  s += quadtree(d, Box{{mx, b.lo[1]}, {b.hi[0], my}}, f, centers, depth - 1);
  s += quadtree(d, Box{{b.lo[0], my}, {mx, b.hi[1]}}, f, centers, depth - 1);
  s += quadtree(d, Box{{mx, my}, {b.hi[0], b.hi[1]}}, f, centers, depth - 1);
  return s;
}

}  // namespace

double over_cell(const Domain& d, const Box& box, const LocalFn& f,
                 std::span<const Point> centers) {
  if (d.dimension() == 1) {
    const Box bb = d.bounding_box();
    const double p = std::max(box.lo[0], bb.lo[0]);
    const double q = std::min(box.hi[0], bb.hi[0]);
    bool near = false;
    for (const auto& c : centers) {
      if (c[0] >= p - (q - p) && c[0] <= q + (q - p)) near = true;
    }
    if (near) return segment(f, p, q, centers, 1e-10);
    const Rule& r = gauss_legendre(8);
    const double h = 0.5 * (q - p), m = 0.5 * (q + p);
    double s = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(Point(m + h * r.x[i]), Point(0.0));
    return s * h;
  }

  std::vector<Point> inside;
  for (const auto& c : centers) {
    if (inside_box(box, c) && contains(d, c)) inside.push_back(c);
  }
  if (inside.size() == 1) {
    const Point c = inside.front();
    auto exit_r = [&](double t) {
      const double ct = std::cos(t), st = std::sin(t);
      return std::min(box_exit(box, c, ct, st), d.ray_exit(c, Point(ct, st)));
    };
    std::vector<double> breaks = corner_angles(c, box);
    if (std::holds_alternative<Rectangle>(d.shape())) {
      const auto more = corner_angles(c, d.bounding_box());
      breaks.insert(breaks.end(), more.begin(), more.end());
    }
    // Other centres near the box are left to the adaptive angular rule.
    return polar(c, exit_r, f, breaks, 1e-9);
  }
  return quadtree(d, box, f, centers, 14);
}

}  // namespace smeq::quad
