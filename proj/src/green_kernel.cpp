#include "smeq/green_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/SparseCholesky>

#include "smeq/error.hpp"
#include "smeq/quadrature.hpp"
#include "smeq/variational.hpp"

namespace smeq {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

// (1 - e^{-x}) for x >= 0, accurate for small x.
double one_minus_exp(double x) { return -std::expm1(-x); }

// ln|sin v| for complex v, stable for large |Im v|.
double log_abs_sin(std::complex<double> v) {
  const double x = v.real(), y = std::abs(v.imag());
  if (y < 20.0) {
    const double s = std::sin(x), sh = std::sinh(y);
    return 0.5 * std::log(s * s + sh * sh);
  }
  const double e = std::exp(-2.0 * y);
  return y - std::numbers::ln2 + 0.5 * std::log1p(-2.0 * std::cos(2.0 * x) * e + e * e);
}

// Sum over n >= 1 of ln|1 - 2 q^{2n} cos 2v + q^{4n}|.
double log_theta_tail(std::complex<double> v, double q) {
  const std::complex<double> c2 = std::cos(2.0 * v);
  const double mag = std::abs(c2);
  const double q2 = q * q;
  double qn = q2;  // q^{2n}
  double s = 0.0;
  for (int n = 1; n < 200; ++n) {
    const std::complex<double> f = 1.0 + qn * qn - 2.0 * qn * c2;
    s += 0.5 * std::log(std::norm(f));
    if (2.0 * qn * mag < 1e-17 && qn * qn < 1e-17) break;
    qn *= q2;
  }
  return s;
}

double log_abs_sinc(std::complex<double> v) {
  if (std::abs(v) < 1e-4) return std::log(std::abs(1.0 - v * v / 6.0));
  return std::log(std::abs(std::sin(v) / v));
}

// ∫_0^a ∫_0^b ln sqrt(s^2 + t^2) dt ds for a, b >= 0.
double log_corner(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  return 0.5 * (a * b * (std::log(a * a + b * b) - 3.0) + a * a * std::atan(b / a) +
                b * b * std::atan(a / b));
}

double log_signed(double u, double v) {
  const double s = (u < 0.0 ? -1.0 : 1.0) * (v < 0.0 ? -1.0 : 1.0);
  return s * log_corner(std::abs(u), std::abs(v));
}

}  // namespace

double log_box_integral(const Box& b, const Point& x) {
  const double x0 = b.lo[0] - x[0], x1 = b.hi[0] - x[0];
  const double y0 = b.lo[1] - x[1], y1 = b.hi[1] - x[1];
  return log_signed(x1, y1) - log_signed(x0, y1) - log_signed(x1, y0) + log_signed(x0, y0);
}

GreenKernel::GreenKernel(Domain d, double alpha) : domain_(std::move(d)), alpha_(alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("invalid-argument", "alpha must be >= 0");
  if (alpha > 0.0 && domain_.dimension() != 1) {
    throw Error("unsupported", "G_alpha is only available on intervals; use helmholtz_solve");
  }
  if (const auto* r = std::get_if<Rectangle>(&domain_.shape())) {
    const double lx = r->b1 - r->a1, ly = r->b2 - r->a2;
    swap_ = ly < lx;
    width_ = swap_ ? ly : lx;
    height_ = swap_ ? lx : ly;
    q_ = std::exp(-std::numbers::pi * height_ / width_);
  }
}

double GreenKernel::evaluate(const Point& x, const Point& y) const {
  if (!contains(domain_, x)) throw Error("outside-domain", "point " + to_string(x) + " is not interior");
  if (!contains(domain_, y)) throw Error("outside-domain", "point " + to_string(y) + " is not interior");
  if (x == y) throw Error("on-diagonal", "G is singular at x = y = " + to_string(x));
  return value(x, y);
}

double GreenKernel::value(const Point& x, const Point& y) const {
  if (const auto* iv = std::get_if<Interval>(&domain_.shape())) {
    const double len = iv->b - iv->a;
    const double lo = std::min(x[0], y[0]) - iv->a;
    const double hi = std::max(x[0], y[0]) - iv->a;
    if (alpha_ == 0.0) return lo * (len - hi) / len;
    const double k = std::sqrt(alpha_);
    // sinh(k lo) sinh(k (L-hi)) / (k sinh(k L)) without overflow.
    return std::exp(-k * (hi - lo)) * one_minus_exp(2.0 * k * lo) *
           one_minus_exp(2.0 * k * (len - hi)) / (2.0 * k * one_minus_exp(2.0 * k * len));
  }
  if (const auto* dk = std::get_if<Disk>(&domain_.shape())) {
    const double r = dk->radius;
    const double xx = (x[0] - dk->center[0]) / r, xy = (x[1] - dk->center[1]) / r;
    const double yx = (y[0] - dk->center[0]) / r, yy = (y[1] - dk->center[1]) / r;
    const double dx = xx - yx, dy = xy - yy;
    const double num = (xx * xx + xy * xy) * (yx * yx + yy * yy) - 2.0 * (xx * yx + xy * yy) + 1.0;
    return kInvTwoPi * 0.5 * std::log(num / (dx * dx + dy * dy));
  }
  return regular_part(x, y) - kInvTwoPi * std::log(distance(x, y));
}

double GreenKernel::near(const Point& x, const Point& off) const {
  if (domain_.dimension() == 1) {
    return value(x, Point(x[0] + off[0]));
  }
  const Point y(x[0] + off[0], x[1] + off[1]);
  return regular_part(x, y) - kInvTwoPi * std::log(std::hypot(off[0], off[1]));
}

double GreenKernel::regular_part(const Point& x, const Point& y) const {
  if (domain_.dimension() == 1) return value(x, y);
  if (const auto* dk = std::get_if<Disk>(&domain_.shape())) {
    const double r = dk->radius;
    const double xx = (x[0] - dk->center[0]) / r, xy = (x[1] - dk->center[1]) / r;
    const double yx = (y[0] - dk->center[0]) / r, yy = (y[1] - dk->center[1]) / r;
    const double num = (xx * xx + xy * xy) * (yx * yx + yy * yy) - 2.0 * (xx * yx + xy * yy) + 1.0;
    return kInvTwoPi * (std::log(r) + 0.5 * std::log(num));
  }
  return rectangle_regular(x, y);
}

double GreenKernel::rectangle_regular(const Point& x, const Point& y) const {
  // Image sum over the reflections of the rectangle, written with the Jacobi
  // theta function theta_1 of nome q = exp(-π height/width).
  const auto& r = std::get<Rectangle>(domain_.shape());
  auto local = [&](const Point& p) {
    const double u = p[0] - r.a1, v = p[1] - r.a2;
    return swap_ ? std::complex<double>(v, u) : std::complex<double>(u, v);
  };
  const std::complex<double> z = local(x), w = local(y);
  const double c = std::numbers::pi / (2.0 * width_);
  const std::complex<double> v1 = c * (z - w), v2 = c * (z + w);
  const std::complex<double> v3 = c * (z - std::conj(w)), v4 = c * (z + std::conj(w));
  const double l1 = log_abs_sinc(v1) + std::log(c) + log_theta_tail(v1, q_);
  const double l2 = log_abs_sin(v2) + log_theta_tail(v2, q_);
  const double l3 = log_abs_sin(v3) + log_theta_tail(v3, q_);
  const double l4 = log_abs_sin(v4) + log_theta_tail(v4, q_);
  return -kInvTwoPi * (l1 + l2 - l3 - l4);
}

double cell_average(const GreenKernel& k, const Grid& g, std::size_t i) {
  const Point& x = g.nodes[i];
  const Box box = g.cell(i);
  const double w = g.weights[i];
  const Domain& d = k.domain();

  if (g.dim == 1) {
    const auto& iv = std::get<Interval>(d.shape());
    const double a = iv.a, b = iv.b, len = b - a;
    const double c0 = box.lo[0], c1 = box.hi[0], s = x[0];
    if (k.alpha() == 0.0) {
      const double left = 0.5 * ((s - a) * (s - a) - (c0 - a) * (c0 - a)) * (b - s) / len;
      const double right = 0.5 * (s - a) * ((b - s) * (b - s) - (b - c1) * (b - c1)) / len;
      return (left + right) / w;
    }
    auto f = [&](double y) { return y == s ? k.value(x, Point(std::nextafter(s, b))) : k.value(x, Point(y)); };
    return (quad::adaptive(f, c0, s, 1e-12) + quad::adaptive(f, s, c1, 1e-12)) / w;
  }

  constexpr int sub = 16;
  const double hx = (box.hi[0] - box.lo[0]) / sub, hy = (box.hi[1] - box.lo[1]) / sub;
  const double full = (box.hi[0] - box.lo[0]) * (box.hi[1] - box.lo[1]);
  const bool cut = w < full * (1.0 - 1e-12);

  double singular = -kInvTwoPi * log_box_integral(box, x);
  double regular = 0.0;
  for (int a = 0; a < sub; ++a) {
    for (int b = 0; b < sub; ++b) {
      const Box sb{{box.lo[0] + a * hx, box.lo[1] + b * hy},
                   {box.lo[0] + (a + 1) * hx, box.lo[1] + (b + 1) * hy}};
      if (!cut) {
        regular += k.regular_part(x, Point(sb.lo[0] + 0.5 * hx, sb.lo[1] + 0.5 * hy)) * hx * hy;
        continue;
      }
      const RegionMoments m = d.clipped_moments(sb);
      const double sa = hx * hy;
      if (m.area < sa * (1.0 - 1e-12)) {
        singular -= (1.0 - m.area / sa) * (-kInvTwoPi * log_box_integral(sb, x));
      }
      if (m.area > 0.0) regular += k.regular_part(x, Point(m.mx / m.area, m.my / m.area)) * m.area;
    }
  }
  return (singular + regular) / w;
}

KernelMatrix assemble(const GreenKernel& k, GridPtr g) {
  const std::size_t n = g->size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const auto& nodes = g->nodes;
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (std::size_t i = j + 1; i < n; ++i) {
      const double v = k.value(nodes[i], nodes[j]);
      m(static_cast<Eigen::Index>(i), jj) = v;
      m(jj, static_cast<Eigen::Index>(i)) = v;
    }
    m(jj, jj) = cell_average(k, *g, j);
  }
  return KernelMatrix{std::move(g), std::move(m), k};
}

namespace {

MeasureSpec density_part(const MeasureSpec& m) {
  MeasureSpec d = m;
  d.atoms.clear();
  d.curves.clear();
  return d;
}

void check_collision(const Grid& g, const Point& a) {
  const std::size_t i = g.nearest_node(a);
  const double scale = std::max(g.spacing[0], g.spacing[1]);
  if (distance(g.nodes[i], a) <= 1e-12 * scale) {
    throw Error("atom-node-collision", "atom at " + to_string(a) + " coincides with a grid node");
  }
}

}  // namespace

GridFunction apply_R(const KernelMatrix& k, const MeasureSpec& data) {
  const Grid& g = *k.grid;
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (data.has_density()) {
    const auto mass = lumped_masses(density_part(data), k.kernel.domain(), g);
    const Eigen::Map<const Eigen::VectorXd> mv(mass.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(n)) = k.sym * mv;
  }
  for (const auto& a : data.atoms) {
    check_collision(g, a.at);
    for (std::size_t i = 0; i < n; ++i) out[i] += k.kernel.value(g.nodes[i], a.at) * a.weight;
  }
  const double h = std::min(g.spacing[0], g.dim == 2 ? g.spacing[1] : g.spacing[0]);
  for (const auto& c : data.curves) {
    for (const auto& s : sample_curve(c, 0.5 * h)) {
      check_collision(g, s.at);
      for (std::size_t i = 0; i < n; ++i) out[i] += k.kernel.value(g.nodes[i], s.at) * s.weight;
    }
  }
  return GridFunction(k.grid, std::move(out));
}

double potential_at(const KernelMatrix& k, const MeasureSpec& data, const Point& x) {
  const Grid& g = *k.grid;
  const Domain& d = k.kernel.domain();
  if (!contains(d, x)) throw Error("outside-domain", "point " + to_string(x) + " is not interior");
  double total = 0.0;
  if (data.has_density()) {
    const MeasureSpec dens = density_part(data);
    const auto mass = lumped_masses(dens, d, g);
    const double h = std::max(g.spacing[0], g.spacing[1]);
    std::vector<Point> centers = dens.singular_centers();
    centers.push_back(x);
    const quad::LocalFn f = [&](const Point& b, const Point& o) {
      const double dv = dens.density_at(b, o);
      if (dv == 0.0) return 0.0;
      if (b == x) return (o[0] == 0.0 && o[1] == 0.0) ? 0.0 : k.kernel.near(x, o) * dv;
      Point y = b;
      y[0] += o[0];
      y[1] += o[1];
      if (y == x) return 0.0;
      return k.kernel.value(x, y) * dv;
    };
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (distance(g.nodes[j], x) < 2.5 * h) {
        total += quad::over_cell(d, g.cell(j), f, centers);
      } else {
        total += k.kernel.value(x, g.nodes[j]) * mass[j];
      }
    }
  }
  for (const auto& a : data.atoms) {
    if (!(a.at == x)) total += k.kernel.value(x, a.at) * a.weight;
  }
  const double h = std::min(g.spacing[0], g.dim == 2 ? g.spacing[1] : g.spacing[0]);
  for (const auto& c : data.curves) {
    for (const auto& s : sample_curve(c, 0.5 * h)) {
      if (!(s.at == x)) total += k.kernel.value(x, s.at) * s.weight;
    }
  }
  return total;
}

GridFunction helmholtz_solve(const Domain& d, GridPtr g, double n, const MeasureSpec& data) {
  if (!(n > 0.0)) throw Error("invalid-argument", "helmholtz_solve requires n > 0");
  const std::size_t size = g->size();
  Eigen::SparseMatrix<double> a = dirichlet_stiffness(*g);
  for (std::size_t i = 0; i < size; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    a.coeffRef(ii, ii) += n * g->weights[i];
  }
  const auto mass = lumped_masses(data, d, *g);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(size));
  for (std::size_t i = 0; i < size; ++i) rhs(static_cast<Eigen::Index>(i)) = n * mass[i];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) throw Error("singular-system", "Helmholtz matrix factorization failed");
  const Eigen::VectorXd w = solver.solve(rhs);
  return GridFunction(std::move(g), std::vector<double>(w.data(), w.data() + w.size()));
}

}  // namespace smeq
