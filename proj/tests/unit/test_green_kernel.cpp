#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "smeq/error.hpp"
#include "smeq/green_kernel.hpp"

using namespace smeq;

namespace {

constexpr double pi = std::numbers::pi;

// Rectangle Green function by the double sine series, summed in one index
// with the other done in closed form (hyperbolic), an oracle independent of
// the theta-function evaluation used by the library.
double rectangle_series(double a, double b, const Point& x, const Point& y) {
  double s = 0.0;
  for (int m = 1; m <= 4000; ++m) {
    const double k = m * pi / a;
    const double lo = std::min(x[1], y[1]), hi = std::max(x[1], y[1]);
    // 1D Green function of -d²/dy² + k² on (0,b).
    const double g = std::exp(k * (lo - hi)) * (1 - std::exp(-2 * k * lo)) * (1 - std::exp(-2 * k * (b - hi))) /
                     (2 * k * (1 - std::exp(-2 * k * b)));
    s += 2.0 / a * std::sin(k * x[0]) * std::sin(k * y[0]) * g;
  }
  return s;
}

// Interval Green function of -u'' + αu by shooting-free closed form.
double interval_alpha(double alpha, double x, double y) {
  const double s = std::sqrt(alpha), lo = std::min(x, y), hi = std::max(x, y);
  return std::sinh(s * lo) * std::sinh(s * (1 - hi)) / (s * std::sinh(s));
}

}  // namespace

TEST_SUITE("green_kernel") {

TEST_CASE("closed-form values") {
  const GreenKernel k(Domain::interval(0, 1));
  CHECK(k.evaluate(Point(0.25), Point(0.5)) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(k.evaluate(Point(0.5), Point(0.25)) == doctest::Approx(0.125).epsilon(1e-14));
  const GreenKernel disk(Domain::disk(Point(0, 0), 1));
  CHECK(disk.evaluate(Point(0.5, 0), Point(0, 0)) == doctest::Approx(std::log(2.0) / (2 * pi)).epsilon(1e-13));
  CHECK(disk.evaluate(Point(0.5, 0), Point(0, 0)) == doctest::Approx(0.110318).epsilon(1e-5));
}

TEST_CASE("errors") {
  const GreenKernel k(Domain::interval(0, 1));
  auto code = [&](const Point& x, const Point& y) {
    try {
      k.evaluate(x, y);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code(Point(0.3), Point(0.3)) == "on-diagonal");
  CHECK(code(Point(1.3), Point(0.3)) == "outside-domain");
  CHECK_THROWS_AS(GreenKernel(Domain::disk(Point(0, 0), 1), 1.0), Error);
}

TEST_CASE("rectangle kernel against the sine series") {
  for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 3.0}}) {
    const GreenKernel k(Domain::rectangle(0, a, 0, b));
    const Point pts[] = {Point(0.3 * a, 0.4 * b), Point(0.7 * a, 0.45 * b), Point(0.1 * a, 0.9 * b),
                         Point(0.5 * a, 0.5 * b)};
    for (const auto& x : pts)
      for (const auto& y : pts) {
        if (x == y) continue;
        CHECK(k.evaluate(x, y) == doctest::Approx(rectangle_series(a, b, x, y)).epsilon(1e-8));
      }
  }
}

TEST_CASE("shifted domains") {
  const GreenKernel k(Domain::interval(2, 4));
  // Scaling: G_(2,4)(x,y) = 2 * G_(0,1)((x-2)/2, (y-2)/2).
  CHECK(k.evaluate(Point(2.5), Point(3.0)) == doctest::Approx(2 * 0.25 * 0.5).epsilon(1e-13));
  const GreenKernel d(Domain::disk(Point(1, -1), 2));
  CHECK(d.evaluate(Point(2, -1), Point(1, -1)) == doctest::Approx(std::log(2.0) / (2 * pi)).epsilon(1e-13));
}

TEST_CASE("resolvent kernel on the interval") {
  for (double alpha : {1.0, 10.0, 1e4, 1e6}) {
    const GreenKernel k(Domain::interval(0, 1), alpha);
    const double ref = alpha < 1e3 ? interval_alpha(alpha, 0.3, 0.6)
                                   : std::exp(-std::sqrt(alpha) * 0.3) / (2 * std::sqrt(alpha));
    CHECK(k.evaluate(Point(0.3), Point(0.6)) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("symmetry, positivity and monotonicity in alpha") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GreenKernel ks[] = {GreenKernel(Domain::interval(0, 1)), GreenKernel(Domain::disk(Point(0, 0), 1)),
                            GreenKernel(Domain::rectangle(0, 2, 0, 1))};
  for (const auto& k : ks) {
    int bad = 0;
    for (int t = 0; t < 1000; ++t) {
      Point x, y;
      do {
        if (k.domain().dimension() == 1) {
          x = Point(u(rng));
          y = Point(u(rng));
        } else {
          const Box b = k.domain().bounding_box();
          auto draw = [&] {
            return Point(b.lo[0] + (b.hi[0] - b.lo[0]) * u(rng), b.lo[1] + (b.hi[1] - b.lo[1]) * u(rng));
          };
          x = draw();
          y = draw();
        }
      } while (!contains(k.domain(), x) || !contains(k.domain(), y) || x == y);
      const double gxy = k.evaluate(x, y), gyx = k.evaluate(y, x);
      if (std::abs(gxy - gyx) > 1e-12 * (1 + gxy) || !(gxy > 0)) ++bad;
    }
    CHECK(bad == 0);
  }
  for (double x : {0.1, 0.4, 0.8}) {
    double prev = INFINITY;
    for (double alpha : {0.0, 1.0, 10.0}) {
      const double g = GreenKernel(Domain::interval(0, 1), alpha).evaluate(Point(x), Point(0.55));
      CHECK(g < prev);
      prev = g;
    }
  }
}

TEST_CASE("log box integral against tensor Gauss") {
  const Box b{{-0.3, -0.1}, {0.5, 0.2}};
  for (const Point& x : {Point(0.7, 0.9), Point(0.0, 0.0), Point(0.5, 0.2), Point(-0.2, 0.15)}) {
    // Split at x so each piece has the singularity at a corner; 200² midpoint is
    // plenty away from corners, graded near them.
    double s = 0.0;
    const double xs[] = {b.lo[0], std::clamp(x[0], b.lo[0], b.hi[0]), b.hi[0]};
    const double ys[] = {b.lo[1], std::clamp(x[1], b.lo[1], b.hi[1]), b.hi[1]};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const int m = 400;
        if (xs[i + 1] == xs[i] || ys[j + 1] == ys[j]) continue;
        for (int p = 0; p < m; ++p)
          for (int q = 0; q < m; ++q) {
            const double u0 = (p + 0.5) / m, v0 = (q + 0.5) / m;
            const double px = xs[i] + (xs[i + 1] - xs[i]) * u0, py = ys[j] + (ys[j + 1] - ys[j]) * v0;
            s += std::log(std::hypot(px - x[0], py - x[1])) * (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]) / (m * m);
          }
      }
    CHECK(log_box_integral(b, x) == doctest::Approx(s).epsilon(1e-4));
  }
}

TEST_CASE("kernel matrix") {
  const Domain d = Domain::interval(0, 1);
  const GreenKernel k(d);
  const KernelMatrix m2 = assemble(k, make_grid(d, {2}));
  // G(0.25, 0.75) * 0.5 = 0.25 * 0.25 * 0.5.
  CHECK(m2.entry(0, 1) == doctest::Approx(0.03125).epsilon(1e-14));
  CHECK(m2.entry(1, 0) == doctest::Approx(0.03125).epsilon(1e-14));
  // Diagonal: cell average of G(0.25, .) over (0, 0.5), times 0.5.
  CHECK(m2.entry(0, 0) == doctest::Approx(0.0625).epsilon(1e-14));

  // Row sums converge to R1 = x(1-x)/2 at second order.
  double prev = 0.0;
  for (int n : {16, 32, 64, 128}) {
    const GridPtr g = make_grid(d, {n});
    const KernelMatrix m = assemble(k, g);
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < g->size(); ++j) s += m.entry(i, j);
      const double x = g->nodes[i][0];
      err = std::max(err, std::abs(s - x * (1 - x) / 2));
    }
    if (prev > 0) CHECK(prev / err > 3.5);
    prev = err;
  }

  for (const Domain& dd : {Domain::disk(Point(0, 0), 1), Domain::rectangle(0, 2, 0, 1)}) {
    const KernelMatrix m = assemble(GreenKernel(dd), make_grid(dd, {16, 16}));
    CHECK(m.sym.minCoeff() >= 0.0);
    CHECK(m.sym.allFinite());
  }
}

TEST_CASE("apply_R on the disk reproduces R1") {
  const Domain d = Domain::disk(Point(0, 0), 1);
  const GridPtr g = make_grid(d, {32, 32});
  const KernelMatrix m = assemble(GreenKernel(d), g);
  const GridFunction r = apply_R(m, MeasureSpec::lebesgue());
  double err = 0.0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    const Point& x = g->nodes[i];
    err = std::max(err, std::abs(r[i] - (1 - x[0] * x[0] - x[1] * x[1]) / 4));
  }
  CHECK(err < 2e-3);
}

TEST_CASE("apply_R examples on the interval") {
  const Domain d = Domain::interval(0, 1);
  const GridPtr g = make_grid(d, {64});
  const KernelMatrix m = assemble(GreenKernel(d), g);
  const GridFunction leb = apply_R(m, MeasureSpec::lebesgue());
  const std::size_t mid = g->nearest_node(Point(0.5));
  CHECK(leb[mid] == doctest::Approx(0.125).epsilon(1e-3));
  const GridFunction dirac = apply_R(m, MeasureSpec::dirac(Point(0.5)));
  const std::size_t q = g->nearest_node(Point(0.25));
  CHECK(dirac[q] == doctest::Approx(0.5 * g->nodes[q][0]).epsilon(1e-12));
  const GridFunction z = apply_R(m, MeasureSpec::zero());
  for (double v : z.values) CHECK(v == 0.0);
  try {
    apply_R(m, MeasureSpec::dirac(g->nodes[3]));
    FAIL("expected collision");
  } catch (const Error& e) {
    CHECK(e.code() == "atom-node-collision");
  }
  // Discrete equation -D2 u = 1 at interior nodes, O(h²).
  const double h = 1.0 / 64;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < g->size(); ++i) {
    worst = std::max(worst, std::abs(-(leb[i - 1] - 2 * leb[i] + leb[i + 1]) / (h * h) - 1.0));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("harmonicity of the disk kernel away from the pole") {
  const GreenKernel k(Domain::disk(Point(0, 0), 1));
  const Point y(0.2, -0.1);
  for (double h : {1e-2, 5e-3}) {
    double worst = 0.0;
    for (const Point& x : {Point(-0.4, 0.3), Point(0.5, 0.5), Point(0.1, 0.4)}) {
      const double lap = (k.value(Point(x[0] + h, x[1]), y) + k.value(Point(x[0] - h, x[1]), y) +
                          k.value(Point(x[0], x[1] + h), y) + k.value(Point(x[0], x[1] - h), y) -
                          4 * k.value(x, y)) / (h * h);
      worst = std::max(worst, std::abs(lap));
    }
    CHECK(worst < 50 * h * h);
  }
}

TEST_CASE("helmholtz mollifier") {
  const Domain d = Domain::interval(0, 1);
  const GridPtr g = make_grid(d, {512});
  double prev = 0.0;
  for (double n : {10.0, 100.0, 1e3, 1e4}) {
    const GridFunction w = helmholtz_solve(d, g, n, MeasureSpec::dirac(Point(0.5)));
    const double mass = pairing(w, [](const Point&) { return 1.0; });
    CHECK(mass > prev);
    CHECK(mass <= 1.0 + 1e-12);
    // <μ, nR_n 1> = 1 - 1/cosh(√n/2).
    CHECK(mass == doctest::Approx(1 - 1 / std::cosh(std::sqrt(n) / 2)).epsilon(1e-2));
    prev = mass;
  }
  CHECK(prev > 0.97);
  const GridFunction z = helmholtz_solve(d, g, 5.0, MeasureSpec::zero());
  for (double v : z.values) CHECK(v == 0.0);
  const GridFunction one = helmholtz_solve(d, g, 1.0, MeasureSpec::lebesgue());
  for (double v : one.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

}  // TEST_SUITE
