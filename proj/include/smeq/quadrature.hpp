#pragma once

#include <functional>
#include <span>
#include <vector>

#include "smeq/geometry.hpp"

namespace smeq::quad {

/// Integrand evaluated at base + offset. Passing the pieces separately lets
/// power-type densities resolve |offset| below the spacing of doubles near
/// their centre, which plain f(x) cannot do.
using LocalFn = std::function<double(const Point& base, const Point& offset)>;

/// Wraps an ordinary f(x) as a LocalFn.
LocalFn local(std::function<double(const Point&)> f);

/// Fixed n-point Gauss-Legendre rule on [-1,1], n in {2,4,8,16,32}.
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};
const Rule& gauss_legendre(int n);

/// tanh-sinh on [0, r_max] of g(r); g may be singular at r = 0 only.
double radial(const std::function<double(double)>& g, double r_max, double rel_tol = 1e-10);

/// Adaptive Gauss-Kronrod on [a,b]; tolerates kinks and interior peaks.
double adaptive(const std::function<double(double)>& g, double a, double b,
                double rel_tol = 1e-10, unsigned max_depth = 18);

/// Integral of f over [p,q] with singularities allowed at p, q and any of
/// `centers` inside.
double segment(const LocalFn& f, double p, double q, std::span<const Point> centers,
               double rel_tol = 1e-10);

/// Integral of f over the domain. `centers` are points where f may have an
/// integrable singularity; in 2D the integral is split with the partition of
/// unity psi_j proportional to |x - c_j|^-2 and each piece is done in polar
/// coordinates about its centre.
double over_domain(const Domain& d, const LocalFn& f, std::span<const Point> centers,
                   double rel_tol = 1e-8);

/// Integral of f over box ∩ domain. A centre inside the box triggers polar
/// integration about it; nearby centres trigger quadtree refinement.
double over_cell(const Domain& d, const Box& box, const LocalFn& f,
                 std::span<const Point> centers);

}  // namespace smeq::quad
