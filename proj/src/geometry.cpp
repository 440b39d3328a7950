#include "smeq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "smeq/error.hpp"

namespace smeq {

double distance(const Point& a, const Point& b) {
  const double dx = a.c[0] - b.c[0];
  const double dy = a.c[1] - b.c[1];
  return std::hypot(dx, dy);
}

double norm(const Point& a) { return std::hypot(a.c[0], a.c[1]); }

std::string to_string(const Point& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << p.c[0];
  if (p.dim == 2) os << ", " << p.c[1];
  os << ")";
  return os.str();
}

Domain Domain::interval(double a, double b) {
  if (!(a < b)) throw Error("invalid-domain", "interval requires a < b");
  return Domain(Interval{a, b});
}

Domain Domain::disk(Point center, double radius) {
  if (center.dim != 2) throw Error("invalid-domain", "disk center needs two coordinates");
  if (!(radius > 0.0)) throw Error("invalid-domain", "disk requires radius > 0");
  return Domain(Disk{center, radius});
}

Domain Domain::rectangle(double a1, double b1, double a2, double b2) {
  if (!(a1 < b1) || !(a2 < b2))
    throw Error("invalid-domain", "rectangle requires a1 < b1 and a2 < b2");
  return Domain(Rectangle{a1, b1, a2, b2});
}

int Domain::dimension() const { return std::holds_alternative<Interval>(shape_) ? 1 : 2; }

double Domain::volume() const {
  if (auto* i = std::get_if<Interval>(&shape_)) return i->b - i->a;
  if (auto* d = std::get_if<Disk>(&shape_)) return std::numbers::pi * d->radius * d->radius;
  const auto& r = std::get<Rectangle>(shape_);
  return (r.b1 - r.a1) * (r.b2 - r.a2);
}

Box Domain::bounding_box() const {
  if (auto* i = std::get_if<Interval>(&shape_)) return Box{{i->a, 0.0}, {i->b, 0.0}};
  if (auto* d = std::get_if<Disk>(&shape_)) {
    return Box{{d->center[0] - d->radius, d->center[1] - d->radius},
               {d->center[0] + d->radius, d->center[1] + d->radius}};
  }
  const auto& r = std::get<Rectangle>(shape_);
  return Box{{r.a1, r.a2}, {r.b1, r.b2}};
}

std::string Domain::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (auto* i = std::get_if<Interval>(&shape_)) {
    os << "interval(" << i->a << ", " << i->b << ")";
  } else if (auto* d = std::get_if<Disk>(&shape_)) {
    os << "disk(center=" << to_string(d->center) << ", radius=" << d->radius << ")";
  } else {
    const auto& r = std::get<Rectangle>(shape_);
    os << "rectangle(" << r.a1 << ", " << r.b1 << ", " << r.a2 << ", " << r.b2 << ")";
  }
  return os.str();
}

void Domain::check_dimension(const Point& x) const {
  if (x.dim != dimension()) {
    throw Error("dimension-mismatch", "point " + to_string(x) + " used with " + describe());
  }
}

double Domain::signed_boundary_distance(const Point& x) const {
  check_dimension(x);
  if (auto* i = std::get_if<Interval>(&shape_)) return std::min(x[0] - i->a, i->b - x[0]);
  if (auto* d = std::get_if<Disk>(&shape_)) return d->radius - distance(x, d->center);
  const auto& r = std::get<Rectangle>(shape_);
  return std::min({x[0] - r.a1, r.b1 - x[0], x[1] - r.a2, r.b2 - x[1]});
}

double Domain::ray_exit(const Point& x, const Point& dir) const {
  if (auto* d = std::get_if<Disk>(&shape_)) {
    const double px = x[0] - d->center[0];
    const double py = x[1] - d->center[1];
    const double a = dir[0] * dir[0] + dir[1] * dir[1];
    const double b = px * dir[0] + py * dir[1];
    const double cc = px * px + py * py - d->radius * d->radius;
    const double disc = std::max(0.0, b * b - a * cc);
    // Stable root of a t^2 + 2 b t + cc = 0 with t >= 0 (cc <= 0 inside).
    if (b >= 0.0) return -cc / (b + std::sqrt(disc));
    return (-b + std::sqrt(disc)) / a;
  }
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    double t = std::numeric_limits<double>::infinity();
    const std::array<double, 2> lo{r->a1, r->a2};
    const std::array<double, 2> hi{r->b1, r->b2};
    for (int k = 0; k < 2; ++k) {
      if (dir[k] > 0.0) t = std::min(t, (hi[k] - x[k]) / dir[k]);
      if (dir[k] < 0.0) t = std::min(t, (lo[k] - x[k]) / dir[k]);
    }
    return std::max(0.0, t);
  }
  throw Error("dimension-mismatch", "ray_exit requires a 2D domain");
}

namespace {

// Antiderivatives for integrals of S(x) = sqrt(R^2 - x^2).
double int_s(double x, double r) {
  const double s = std::sqrt(std::max(0.0, r * r - x * x));
  return 0.5 * (x * s + r * r * std::asin(std::clamp(x / r, -1.0, 1.0)));
}
double int_xs(double x, double r) {
  const double s2 = std::max(0.0, r * r - x * x);
  return -s2 * std::sqrt(s2) / 3.0;
}
double int_s2(double x, double r) { return r * r * x - x * x * x / 3.0; }

// Moments of {(x,y): x0<=x<=x1, y0<=y<=y1, x^2+y^2<=r^2}.
RegionMoments disk_box_moments(double x0, double x1, double y0, double y1, double r) {
  RegionMoments m;
  const double lo = std::max(x0, -r);
  const double hi = std::min(x1, r);
  if (!(hi > lo) || !(y1 > y0)) return m;

  std::vector<double> cuts{lo, hi};
  for (double y : {y0, y1}) {
    if (std::abs(y) < r) {
      const double s = std::sqrt(r * r - y * y);
      for (double c : {-s, s}) {
        if (c > lo && c < hi) cuts.push_back(c);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());

  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double p = cuts[k];
    const double q = cuts[k + 1];
    if (!(q > p)) continue;
    const double mid = 0.5 * (p + q);
    const double s = std::sqrt(std::max(0.0, r * r - mid * mid));
    const bool bottom_curve = y0 < -s;
    const bool top_curve = y1 > s;
    const double bot = bottom_curve ? -s : y0;
    const double top = top_curve ? s : y1;
    if (!(top > bot)) continue;

    const double dx = q - p;
    const double i1 = int_s(q, r) - int_s(p, r);
    const double ix = int_xs(q, r) - int_xs(p, r);
    const double ix2 = 0.5 * (q * q - p * p);
    const double is2 = int_s2(q, r) - int_s2(p, r);

    // Integrals of top(x), bottom(x) and x*top, x*bottom, top^2, bottom^2.
    const double t_int = top_curve ? i1 : y1 * dx;
    const double b_int = bottom_curve ? -i1 : y0 * dx;
    const double xt_int = top_curve ? ix : y1 * ix2;
    const double xb_int = bottom_curve ? -ix : y0 * ix2;
    const double t2_int = top_curve ? is2 : y1 * y1 * dx;
    const double b2_int = bottom_curve ? is2 : y0 * y0 * dx;

    m.area += t_int - b_int;
    m.mx += xt_int - xb_int;
    m.my += 0.5 * (t2_int - b2_int);
  }
  return m;
}

// Length of the horizontal or vertical chord [p,q] inside the circle of radius r at origin.
double disk_segment_length(const Point& p, const Point& q, double r) {
  const bool horizontal = p[1] == q[1];
  const double fixed = horizontal ? p[1] : p[0];
  if (std::abs(fixed) >= r) return 0.0;
  const double s = std::sqrt(r * r - fixed * fixed);
  const double a = horizontal ? std::min(p[0], q[0]) : std::min(p[1], q[1]);
  const double b = horizontal ? std::max(p[0], q[0]) : std::max(p[1], q[1]);
  return std::max(0.0, std::min(b, s) - std::max(a, -s));
}

double disk_arc_in_box(double x0, double x1, double y0, double y1, double r) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> angles{0.0, two_pi};
  auto push = [&](double a) {
    a = std::fmod(a, two_pi);
    if (a < 0.0) a += two_pi;
    angles.push_back(a);
  };
  for (double x : {x0, x1}) {
    if (std::abs(x) <= r) {
      const double a = std::acos(x / r);
      push(a);
      push(-a);
    }
  }
  for (double y : {y0, y1}) {
    if (std::abs(y) <= r) {
      const double a = std::asin(y / r);
      push(a);
      push(std::numbers::pi - a);
    }
  }
  std::sort(angles.begin(), angles.end());
  double len = 0.0;
  for (std::size_t k = 0; k + 1 < angles.size(); ++k) {
    const double a = angles[k];
    const double b = angles[k + 1];
    if (!(b > a)) continue;
    const double m = 0.5 * (a + b);
    const double x = r * std::cos(m);
    const double y = r * std::sin(m);
    if (x >= x0 && x <= x1 && y >= y0 && y <= y1) len += r * (b - a);
  }
  return len;
}

}  // namespace

RegionMoments Domain::clipped_moments(const Box& box) const {
  if (auto* d = std::get_if<Disk>(&shape_)) {
    const double cx = d->center[0];
    const double cy = d->center[1];
    RegionMoments m = disk_box_moments(box.lo[0] - cx, box.hi[0] - cx, box.lo[1] - cy,
                                       box.hi[1] - cy, d->radius);
    m.mx += cx * m.area;
    m.my += cy * m.area;
    return m;
  }
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    const double x0 = std::max(box.lo[0], r->a1), x1 = std::min(box.hi[0], r->b1);
    const double y0 = std::max(box.lo[1], r->a2), y1 = std::min(box.hi[1], r->b2);
    RegionMoments m;
    if (x1 > x0 && y1 > y0) {
      m.area = (x1 - x0) * (y1 - y0);
      m.mx = m.area * 0.5 * (x0 + x1);
      m.my = m.area * 0.5 * (y0 + y1);
    }
    return m;
  }
  throw Error("dimension-mismatch", "clipped_moments requires a 2D domain");
}

double Domain::clipped_segment_length(const Point& p, const Point& q) const {
  if (auto* d = std::get_if<Disk>(&shape_)) {
    const Point pc(p[0] - d->center[0], p[1] - d->center[1]);
    const Point qc(q[0] - d->center[0], q[1] - d->center[1]);
    return disk_segment_length(pc, qc, d->radius);
  }
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    const bool horizontal = p[1] == q[1];
    if (horizontal) {
      if (p[1] < r->a2 || p[1] > r->b2) return 0.0;
      return std::max(0.0, std::min(std::max(p[0], q[0]), r->b1) -
                               std::max(std::min(p[0], q[0]), r->a1));
    }
    if (p[0] < r->a1 || p[0] > r->b1) return 0.0;
    return std::max(0.0, std::min(std::max(p[1], q[1]), r->b2) -
                             std::max(std::min(p[1], q[1]), r->a2));
  }
  throw Error("dimension-mismatch", "clipped_segment_length requires a 2D domain");
}

double Domain::boundary_length_in(const Box& box) const {
  if (auto* d = std::get_if<Disk>(&shape_)) {
    return disk_arc_in_box(box.lo[0] - d->center[0], box.hi[0] - d->center[0],
                           box.lo[1] - d->center[1], box.hi[1] - d->center[1], d->radius);
  }
  if (auto* r = std::get_if<Rectangle>(&shape_)) {
    auto overlap = [](double a, double b, double c, double d) {
      return std::max(0.0, std::min(b, d) - std::max(a, c));
    };
    double len = 0.0;
    for (double x : {r->a1, r->b1}) {
      if (x >= box.lo[0] && x <= box.hi[0]) len += overlap(box.lo[1], box.hi[1], r->a2, r->b2);
    }
    for (double y : {r->a2, r->b2}) {
      if (y >= box.lo[1] && y <= box.hi[1]) len += overlap(box.lo[0], box.hi[0], r->a1, r->b1);
    }
    return len;
  }
  throw Error("dimension-mismatch", "boundary_length_in requires a 2D domain");
}

bool contains(const Domain& d, const Point& x) { return d.signed_boundary_distance(x) > 0.0; }

double boundary_distance(const Domain& d, const Point& x) {
  const double s = d.signed_boundary_distance(x);
  if (!(s > 0.0)) throw Error("outside-domain", "point " + to_string(x) + " is not interior");
  return s;
}

Box Grid::cell(std::size_t i) const {
  const auto& l = lattice[i];
  Box b;
  for (int k = 0; k < dim; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    b.lo[kk] = origin[kk] + spacing[kk] * l[kk];
    b.hi[kk] = origin[kk] + spacing[kk] * (l[kk] + 1);
  }
  return b;
}

int Grid::node_of_cell(int ix, int iy) const {
  if (ix < 0 || ix >= resolution[0]) return -1;
  if (dim == 1) return node_at[static_cast<std::size_t>(ix)];
  if (iy < 0 || iy >= resolution[1]) return -1;
  return node_at[static_cast<std::size_t>(ix) * static_cast<std::size_t>(resolution[1]) +
                 static_cast<std::size_t>(iy)];
}

std::array<int, 2> Grid::cell_index_of(const Point& x) const {
  std::array<int, 2> idx{0, 0};
  for (int k = 0; k < dim; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int i = static_cast<int>(std::floor((x[k] - origin[kk]) / spacing[kk]));
    idx[kk] = std::clamp(i, 0, resolution[kk] - 1);
  }
  return idx;
}

std::size_t Grid::nearest_node(const Point& x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double dd = distance(nodes[i], x);
    if (dd < best_d) {
      best_d = dd;
      best = i;
    }
  }
  return best;
}

double Grid::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

Grid build_interval_grid(const Interval& iv, int n) {
  Grid g;
  g.dim = 1;
  g.resolution = {n, 1};
  const double h = (iv.b - iv.a) / n;
  g.spacing = {h, 0.0};
  g.origin = {iv.a, 0.0};
  g.nodes.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    g.nodes.emplace_back(iv.a + (i + 0.5) * h);
    g.weights.push_back(h);
    g.lattice.push_back({i, 0});
    g.node_at.push_back(i);
  }
  for (int i = 0; i + 1 < n; ++i) g.faces.push_back({i, i + 1, 1.0, h});
  g.boundary_faces.push_back({0, 1.0, 0.5 * h});
  g.boundary_faces.push_back({n - 1, 1.0, 0.5 * h});
  return g;
}

Grid build_planar_grid(const Domain& d, int nx, int ny) {
  Grid g;
  g.dim = 2;
  g.resolution = {nx, ny};
  const Box bb = d.bounding_box();
  g.origin = {bb.lo[0], bb.lo[1]};
  g.spacing = {(bb.hi[0] - bb.lo[0]) / nx, (bb.hi[1] - bb.lo[1]) / ny};
  g.node_at.assign(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), -1);
  const auto [hx, hy] = g.spacing;

  auto cell_box = [&](int ix, int iy) {
    return Box{{g.origin[0] + ix * hx, g.origin[1] + iy * hy},
               {g.origin[0] + (ix + 1) * hx, g.origin[1] + (iy + 1) * hy}};
  };

  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      const Box box = cell_box(ix, iy);
      const RegionMoments m = d.clipped_moments(box);
      if (!(m.area > 0.0)) continue;
      // The centroid of a convex clipped cell is interior; roundoff on slivers
      // can put it on the boundary, so nudge toward the domain centre.
      const Point centroid(m.mx / m.area, m.my / m.area);
      const Point mid(0.5 * (bb.lo[0] + bb.hi[0]), 0.5 * (bb.lo[1] + bb.hi[1]));
      Point p = centroid;
      for (double t = 1e-14; !contains(d, p) && t < 1.0; t *= 4.0) {
        p = Point(centroid[0] + t * (mid[0] - centroid[0]), centroid[1] + t * (mid[1] - centroid[1]));
      }
      if (!contains(d, p)) throw Error("grid-construction", "could not place node inside cell");
      g.node_at[static_cast<std::size_t>(ix) * static_cast<std::size_t>(ny) +
                static_cast<std::size_t>(iy)] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(p);
      g.weights.push_back(m.area);
      g.lattice.push_back({ix, iy});
    }
  }

  for (std::size_t n = 0; n < g.nodes.size(); ++n) {
    const auto [ix, iy] = g.lattice[n];
    const Box box = cell_box(ix, iy);
    const int i = static_cast<int>(n);
    if (const int j = g.node_of_cell(ix + 1, iy); j >= 0) {
      const double len = d.clipped_segment_length(Point(box.hi[0], box.lo[1]),
                                                  Point(box.hi[0], box.hi[1]));
      if (len > 0.0) g.faces.push_back({i, j, len, distance(g.nodes[n], g.nodes[static_cast<std::size_t>(j)])});
    }
    if (const int j = g.node_of_cell(ix, iy + 1); j >= 0) {
      const double len = d.clipped_segment_length(Point(box.lo[0], box.hi[1]),
                                                  Point(box.hi[0], box.hi[1]));
      if (len > 0.0) g.faces.push_back({i, j, len, distance(g.nodes[n], g.nodes[static_cast<std::size_t>(j)])});
    }

    if (const auto* r = std::get_if<Rectangle>(&d.shape())) {
      const Point& x = g.nodes[n];
      if (ix == 0) g.boundary_faces.push_back({i, hy, x[0] - r->a1});
      if (ix == nx - 1) g.boundary_faces.push_back({i, hy, r->b1 - x[0]});
      if (iy == 0) g.boundary_faces.push_back({i, hx, x[1] - r->a2});
      if (iy == ny - 1) g.boundary_faces.push_back({i, hx, r->b2 - x[1]});
    } else {
      const double arc = d.boundary_length_in(box);
      if (arc > 0.0) g.boundary_faces.push_back({i, arc, boundary_distance(d, g.nodes[n])});
    }
  }
  return g;
}

}  // namespace

Grid build_grid(const Domain& d, std::span<const int> resolution) {
  if (resolution.empty()) throw Error("invalid-resolution", "resolution must be given");
  for (int r : resolution) {
    if (r < 2) throw Error("invalid-resolution", "resolution must be >= 2 per axis");
  }
  if (d.dimension() == 1) {
    if (resolution.size() != 1) throw Error("invalid-resolution", "interval takes one count");
    return build_interval_grid(std::get<Interval>(d.shape()), resolution[0]);
  }
  if (resolution.size() > 2) throw Error("invalid-resolution", "2D domains take at most two counts");
  const int nx = resolution[0];
  const int ny = resolution.size() == 2 ? resolution[1] : resolution[0];
  return build_planar_grid(d, nx, ny);
}

Grid build_grid(const Domain& d, std::initializer_list<int> resolution) {
  return build_grid(d, std::span<const int>(resolution.begin(), resolution.size()));
}

}  // namespace smeq
