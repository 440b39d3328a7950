#include "smeq/fredholm.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "smeq/error.hpp"
#include "smeq/quadrature.hpp"

namespace smeq {

namespace {

using Eigen::Index;
using Vec = Eigen::VectorXd;

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Index>(v.size()));
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

void check_levels(const std::vector<double>& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) throw Error("invalid-argument", "truncation levels must be positive");
    if (i > 0 && !(levels[i] > levels[i - 1])) {
      throw Error("invalid-argument", "truncation levels must be strictly increasing");
    }
  }
}

// Jacobi-preconditioned CG on (I + S G S) z = S f with S = diag(sqrt(m)).
Vec pcg(const Eigen::MatrixXd& g, const Vec& s, const Vec& b, Vec z, double tol, Index max_iter) {
  const Vec precond = (1.0 + s.array().square() * g.diagonal().array()).inverse();
  auto apply = [&](const Vec& v) -> Vec { return v + s.cwiseProduct(g * s.cwiseProduct(v)); };
  const double bn = b.norm();
  if (bn == 0.0) return Vec::Zero(b.size());
  Vec r = b - apply(z);
  Vec y = precond.cwiseProduct(r);
  Vec p = y;
  double ry = r.dot(y);
  for (Index it = 0; it < max_iter; ++it) {
    if (r.norm() <= tol * bn) return z;
    const Vec ap = apply(p);
    const double alpha = ry / p.dot(ap);
    z += alpha * p;
    r -= alpha * ap;
    y = precond.cwiseProduct(r);
    const double ry_new = r.dot(y);
    p = y + (ry_new / ry) * p;
    ry = ry_new;
  }
  if (r.norm() <= tol * bn) return z;
  throw Error("linear-solve-failure", "preconditioned CG did not converge");
}

}  // namespace

struct FactorCache {
  std::map<std::vector<double>, Eigen::PartialPivLU<Eigen::MatrixXd>> lu;
};

std::shared_ptr<FactorCache> make_factor_cache() { return std::make_shared<FactorCache>(); }

std::vector<double> potential_masses(const PotentialMeasure& nu, const Domain& d, const Grid& g) {
  if (!nu.singular_points().empty() && !nu.is_truncated()) {
    throw Error("truncation-required", "potential has singular points; a truncation ladder is required");
  }
  return lumped_masses(nu.base(), d, g);
}

GridFunction solve_level(const KernelMatrix& k, const std::vector<double>& nu_mass,
                         const GridFunction& rhs, const FredholmOptions& opt, const GridFunction* warm,
                         std::string* method) {
  const auto n = static_cast<Index>(rhs.size());
  const Vec f = to_vec(rhs.values);
  const Vec m = to_vec(nu_mass);
  if (m.cwiseAbs().maxCoeff() == 0.0) {
    if (method) *method = "none";
    return rhs;
  }
  Vec u;
  if (rhs.size() <= opt.dense_limit) {
    auto factor = [&] {
      Eigen::MatrixXd a = k.sym * m.asDiagonal();
      a.diagonal().array() += 1.0;
      return Eigen::PartialPivLU<Eigen::MatrixXd>(a);
    };
    if (opt.factors) {
      auto it = opt.factors->lu.find(nu_mass);
      if (it == opt.factors->lu.end()) it = opt.factors->lu.emplace(nu_mass, factor()).first;
      u = it->second.solve(f);
    } else {
      u = factor().solve(f);
    }
    if (method) *method = "dense-lu";
  } else {
    const Vec s = m.cwiseSqrt();
    Vec z0 = warm ? Vec(s.cwiseProduct(to_vec(warm->values))) : Vec::Zero(n);
    const Vec z = pcg(k.sym, s, s.cwiseProduct(f), z0, opt.cg_tol, 20 * n);
    u = f - k.sym * s.cwiseProduct(z);
    if (method) *method = "pcg";
  }
  if (!u.allFinite()) throw Error("linear-solve-failure", "non-finite solution");
  return GridFunction(rhs.grid, to_std(u));
}

SolveReport solve_duality(const KernelMatrix& k, const PotentialMeasure& nu, const MeasureSpec& mu,
                          const std::vector<double>& levels, const FredholmOptions& opt) {
  const Domain& d = k.kernel.domain();
  check_levels(levels);
  if (!nu.singular_points().empty() && levels.empty()) {
    throw Error("truncation-required", "potential has singular points; a truncation ladder is required");
  }
  SolveReport rep;
  const GridFunction rhs = apply_R(k, mu);
  const double tv = total_variation(mu, d);

  if (levels.empty()) {
    const auto m = potential_masses(nu, d, *k.grid);
    rep.solution = solve_level(k, m, rhs, opt, nullptr, &rep.method);
    rep.ladder.push_back(rep.solution);
    rep.stop_reason = "single-level";
    for (std::size_t i = 0; i < m.size(); ++i) rep.nu_mass_of_u += std::abs(rep.solution.values[i]) * m[i];
    return rep;
  }

  std::vector<double> m;
  rep.stop_reason = "levels-exhausted";
  for (double level : levels) {
    m = potential_masses(truncate(nu, level), d, *k.grid);
    const GridFunction* warm = rep.ladder.empty() ? nullptr : &rep.ladder.back();
    GridFunction u = solve_level(k, m, rhs, opt, warm, &rep.method);
    rep.truncation_levels.push_back(level);
    double delta = -1.0;
    if (!rep.ladder.empty()) {
      delta = l1_distance(u, rep.ladder.back());
      rep.l1_deltas.push_back(delta);
    }
    rep.ladder.push_back(std::move(u));
    if (opt.stop_early && delta >= 0.0 && delta < opt.stop_factor * tv) {
      rep.stop_reason = "converged";
      break;
    }
  }
  rep.solution = rep.ladder.back();
  for (std::size_t i = 0; i < m.size(); ++i) rep.nu_mass_of_u += std::abs(rep.solution.values[i]) * m[i];
  return rep;
}

SolveReport solve_duality(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                          const MeasureSpec& mu, const std::vector<double>& levels,
                          const FredholmOptions& opt) {
  const KernelMatrix k = assemble(GreenKernel(d), std::move(g));
  return solve_duality(k, nu, mu, levels, opt);
}

GridFunction solve_R_nu_eta(const KernelMatrix& k, const PotentialMeasure& nu,
                            const std::function<double(const Point&)>& eta,
                            const std::vector<double>& levels, const FredholmOptions& opt) {
  FredholmOptions o = opt;
  o.stop_early = false;
  return solve_duality(k, nu, MeasureSpec::function(eta), levels, o).solution;
}

GridFunction solve_R_nu_eta(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                            const std::function<double(const Point&)>& eta,
                            const std::vector<double>& levels) {
  const KernelMatrix k = assemble(GreenKernel(d), std::move(g));
  return solve_R_nu_eta(k, nu, eta, levels);
}

namespace {

struct QuadPoint {
  Point y;
  double c = 0.0;
  std::size_t cell = 0;
};

// Gauss-8 on [p,q], graded geometrically toward any endpoint that is a singular centre.
void segment_points(double p, double q, const std::vector<double>& centers, std::size_t cell,
                    std::vector<QuadPoint>& out) {
  const auto& rule = quad::gauss_legendre(8);
  auto gauss = [&](double a, double b) {
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.x.size(); ++i) out.push_back({Point(m + h * rule.x[i]), h * rule.w[i], cell});
  };
  auto is_center = [&](double x) {
    return std::any_of(centers.begin(), centers.end(), [&](double c) { return std::abs(c - x) <= 1e-14; });
  };
  const bool left = is_center(p), right = is_center(q);
  if (!left && !right) {
    gauss(p, q);
    return;
  }
  const double mid = 0.5 * (p + q);
  auto graded = [&](double from, double to) {
    // Subintervals [from + (to-from) 2^{-k-1}, from + (to-from) 2^{-k}].
    double outer = to;
    for (int k = 0; k < 60; ++k) {
      const double inner = from + 0.5 * (outer - from);
      gauss(std::min(inner, outer), std::max(inner, outer));
      outer = inner;
    }
  };
  if (left) graded(p, mid); else gauss(p, mid);
  if (right) graded(q, mid); else gauss(mid, q);
}

}  // namespace

double resolvent_identity_residual(const KernelMatrix& k, const PotentialMeasure& nu,
                                   const std::function<double(const Point&)>& eta,
                                   const std::vector<double>& levels, const FredholmOptions& opt) {
  const Grid& g = *k.grid;
  const Domain& d = k.kernel.domain();
  const GridFunction w = solve_R_nu_eta(k, nu, eta, levels, opt);
  const PotentialMeasure nu_l = levels.empty() ? nu : truncate(nu, levels.back());
  const MeasureSpec& base = nu_l.base();
  const std::size_t n = g.size();

  std::vector<QuadPoint> pts;
  std::vector<double> wrec;  // reconstruction of w at the quadrature points
  if (g.dim == 1) {
    std::vector<double> centers;
    for (const auto& c : base.singular_centers()) centers.push_back(c[0]);
    for (std::size_t j = 0; j < n; ++j) {
      const Box b = g.cell(j);
      std::vector<double> cuts{b.lo[0], g.nodes[j][0], b.hi[0]};
      for (double c : centers) {
        if (c > b.lo[0] && c < b.hi[0] && c != g.nodes[j][0]) cuts.push_back(c);
      }
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t s = 0; s + 1 < cuts.size(); ++s) segment_points(cuts[s], cuts[s + 1], centers, j, pts);
    }
    const auto& iv = std::get<Interval>(d.shape());
    auto interp = [&](double y) {
      // Piecewise linear through (a,0), the nodes, and (b,0).
      const double t = (y - g.origin[0]) / g.spacing[0] - 0.5;
      const int i0 = static_cast<int>(std::floor(t));
      const double fr = t - i0;
      const double v0 = i0 >= 0 ? w.values[static_cast<std::size_t>(i0)] : 0.0;
      const double v1 = i0 + 1 < static_cast<int>(n) ? w.values[static_cast<std::size_t>(i0 + 1)] : 0.0;
      if (i0 < 0) return v1 * (y - iv.a) / (g.nodes[0][0] - iv.a);
      if (i0 + 1 >= static_cast<int>(n)) return v0 * (iv.b - y) / (iv.b - g.nodes[n - 1][0]);
      return (1.0 - fr) * v0 + fr * v1;
    };
    for (const auto& p : pts) wrec.push_back(interp(p.y[0]));
  } else {
    const auto& rule = quad::gauss_legendre(2);
    for (std::size_t j = 0; j < n; ++j) {
      const Box b = g.cell(j);
      const Point& x = g.nodes[j];
      const double xs[3] = {b.lo[0], x[0], b.hi[0]};
      const double ys[3] = {b.lo[1], x[1], b.hi[1]};
      for (int a = 0; a < 2; ++a) {
        for (int c = 0; c < 2; ++c) {
          const Box q{{xs[a], ys[c]}, {xs[a + 1], ys[c + 1]}};
          const RegionMoments mm = d.clipped_moments(q);
          if (!(mm.area > 0.0)) continue;
          const double qa = (q.hi[0] - q.lo[0]) * (q.hi[1] - q.lo[1]);
          if (mm.area < qa * (1.0 - 1e-12)) {
            pts.push_back({Point(mm.mx / mm.area, mm.my / mm.area), mm.area, j});
            continue;
          }
          const double hx = 0.5 * (q.hi[0] - q.lo[0]), hy = 0.5 * (q.hi[1] - q.lo[1]);
          for (std::size_t s = 0; s < rule.x.size(); ++s) {
            for (std::size_t t = 0; t < rule.x.size(); ++t) {
              pts.push_back({Point(q.lo[0] + hx * (1 + rule.x[s]), q.lo[1] + hy * (1 + rule.x[t])),
                             hx * hy * rule.w[s] * rule.w[t], j});
            }
          }
        }
      }
    }
    for (const auto& p : pts) wrec.push_back(w.values[p.cell]);
  }

  std::vector<double> f_nu(pts.size()), f_eta(pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    f_nu[q] = wrec[q] * base.density_at(pts[q].y) * pts[q].c;
    f_eta[q] = eta(pts[q].y) * pts[q].c;
  }
  // Own-cell sums for the 2D singular cell.
  std::vector<double> own_nu(n, 0.0), own_eta(n, 0.0);
  if (g.dim == 2) {
    for (std::size_t q = 0; q < pts.size(); ++q) {
      own_nu[pts[q].cell] += f_nu[q];
      own_eta[pts[q].cell] += f_eta[q];
    }
  }

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point& x = g.nodes[i];
    double r_nu = 0.0, r_eta = 0.0;
    for (std::size_t q = 0; q < pts.size(); ++q) {
      if (g.dim == 2 && pts[q].cell == i) continue;
      const double gv = k.kernel.value(x, pts[q].y);
      r_nu += gv * f_nu[q];
      r_eta += gv * f_eta[q];
    }
    if (g.dim == 2) {
      const double ca = k.sym(static_cast<Index>(i), static_cast<Index>(i));
      r_nu += ca * own_nu[i];
      r_eta += ca * own_eta[i];
    }
    for (const auto& a : base.atoms) {
      double wa = 0.0;
      // Same reconstruction as the density part.
      const double t = (a.at[0] - g.origin[0]) / g.spacing[0] - 0.5;
      const int i0 = static_cast<int>(std::floor(t));
      const double fr = t - i0;
      if (i0 >= 0) wa += (1.0 - fr) * w.values[static_cast<std::size_t>(i0)];
      if (i0 + 1 < static_cast<int>(n)) wa += fr * w.values[static_cast<std::size_t>(i0 + 1)];
      r_nu += k.kernel.value(x, a.at) * a.weight * wa;
    }
    for (const auto& c : base.curves) {
      for (const auto& s : sample_curve(c, 0.5 * g.spacing[0])) {
        r_nu += k.kernel.value(x, s.at) * s.weight * w.values[g.nearest_node(s.at)];
      }
    }
    num += std::abs(w.values[i] + r_nu - r_eta) * g.weights[i];
    den += std::abs(r_eta) * g.weights[i];
  }
  return den > 0.0 ? num / den : num;
}

double resolvent_identity_residual(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                                   const std::function<double(const Point&)>& eta,
                                   const std::vector<double>& levels) {
  const KernelMatrix k = assemble(GreenKernel(d), std::move(g));
  return resolvent_identity_residual(k, nu, eta, levels);
}

NeumannResult neumann_series_solve(const KernelMatrix& k, const PotentialMeasure& nu,
                                   const MeasureSpec& mu, int max_iter, double tol) {
  const Grid& g = *k.grid;
  const Vec m = to_vec(potential_masses(nu, k.kernel.domain(), g));
  const GridFunction rhs = apply_R(k, mu);
  const Vec f = to_vec(rhs.values);
  const auto n = static_cast<Index>(g.size());

  NeumannResult out;
  Vec v = Vec::Ones(n);
  double radius = 0.0;
  for (int it = 0; it < 50; ++it) {
    const Vec bv = k.sym * m.cwiseProduct(v);
    const double nv = bv.norm();
    if (nv == 0.0) {
      radius = 0.0;
      break;
    }
    radius = nv / v.norm();
    v = bv / nv;
  }
  out.spectral_radius = radius;
  if (radius >= 1.0) {
    throw Error("series-divergent", "spectral radius estimate " + std::to_string(radius) + " >= 1");
  }

  Vec u = f;
  const Vec w = to_vec(g.weights);
  for (int it = 1; it <= max_iter; ++it) {
    const Vec next = f - k.sym * m.cwiseProduct(u);
    const double change = ((next - u).cwiseAbs().cwiseProduct(w)).sum();
    u = next;
    out.iterations = it;
    if (change <= tol) break;
  }
  out.solution = GridFunction(k.grid, to_std(u));
  return out;
}

}  // namespace smeq
