#include "smeq/variational.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>

#include "smeq/error.hpp"
#include "smeq/green_kernel.hpp"

namespace smeq {

namespace {

Eigen::Map<const Eigen::VectorXd> view(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

Eigen::SparseMatrix<double> system_matrix(const QuadraticForm& q) {
  Eigen::SparseMatrix<double> a = q.stiffness;
  for (std::size_t i = 0; i < q.nu_mass.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    a.coeffRef(ii, ii) += q.nu_mass[i];
  }
  return a;
}

}  // namespace

Eigen::SparseMatrix<double> dirichlet_stiffness(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * g.faces.size() + g.boundary_faces.size());
  for (const auto& f : g.faces) {
    const double c = f.length / f.distance;
    t.emplace_back(f.i, f.i, c);
    t.emplace_back(f.j, f.j, c);
    t.emplace_back(f.i, f.j, -c);
    t.emplace_back(f.j, f.i, -c);
  }
  for (const auto& b : g.boundary_faces) t.emplace_back(b.i, b.i, b.length / b.distance);
  Eigen::SparseMatrix<double> k(n, n);
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

QuadraticForm assemble_form(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                            const GridFunction& mu_density) {
  if (mu_density.size() != g->size()) throw Error("size-mismatch", "load density does not match the grid");
  if (!nu.singular_points().empty() && !nu.is_truncated()) {
    throw Error("truncation-required", "potential has singular points; truncate before assembling");
  }
  QuadraticForm q;
  q.grid = g;
  q.stiffness = dirichlet_stiffness(*g);
  q.nu_mass = lumped_masses(nu.base(), d, *g);
  q.load.resize(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) q.load[i] = mu_density.values[i] * g->weights[i];
  return q;
}

double energy(const QuadraticForm& q, const std::vector<double>& u) {
  const auto uv = view(u);
  double e = 0.5 * uv.dot(q.stiffness * uv);
  for (std::size_t i = 0; i < u.size(); ++i) e += 0.5 * q.nu_mass[i] * u[i] * u[i] - q.load[i] * u[i];
  return e;
}

EnergyReport minimize(const QuadraticForm& q, double tol) {
  const std::size_t n = q.load.size();
  EnergyReport r;
  const auto b = view(q.load);
  const double bn = b.norm();
  if (bn == 0.0) {
    r.minimizer = GridFunction::zeros(q.grid);
    return r;
  }
  const Eigen::SparseMatrix<double> a = system_matrix(q);
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10 * n));
  cg.compute(a);
  const Eigen::VectorXd u = cg.solve(b);
  if (cg.info() != Eigen::Success) {
    throw Error("cg-nonconvergence", "conjugate gradients did not converge in 10N iterations");
  }
  r.iterations = static_cast<int>(cg.iterations());
  r.minimizer = GridFunction(q.grid, std::vector<double>(u.data(), u.data() + u.size()));
  r.kkt_residual = (a * u - b).norm() / bn;
  r.energy_value = energy(q, r.minimizer.values);

  // Energy probes at u ± δ e_i on a fixed spread of nodes.
  constexpr double delta = 1e-4;
  const std::size_t probes = std::min<std::size_t>(100, n);
  std::vector<double> v = r.minimizer.values;
  for (std::size_t p = 0; p < probes; ++p) {
    const std::size_t i = (p * 7919) % n;
    for (double s : {-delta, delta}) {
      v[i] += s;
      if (energy(q, v) < r.energy_value - 1e-12) r.probes_ok = false;
      v[i] -= s;
    }
  }
  return r;
}

std::vector<MollifiedStep> mollify_and_solve(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                                             const MeasureSpec& mu, const std::vector<double>& n_ladder,
                                             double tol, const std::optional<GridFunction>& reference) {
  for (std::size_t i = 1; i < n_ladder.size(); ++i) {
    if (!(n_ladder[i] > n_ladder[i - 1])) throw Error("invalid-argument", "mollifier ladder must increase");
  }
  std::vector<MollifiedStep> out;
  for (double n : n_ladder) {
    MollifiedStep step;
    step.n = n;
    const GridFunction dens = helmholtz_solve(d, g, n, mu);
    step.mollified_mass = pairing(dens, [](const Point&) { return 1.0; });
    step.report = minimize(assemble_form(d, g, nu, dens), tol);
    if (!out.empty()) step.l1_to_previous = l1_distance(step.report.minimizer, out.back().report.minimizer);
    if (reference) step.l1_to_reference = l1_distance(step.report.minimizer, *reference);
    out.push_back(std::move(step));
  }
  return out;
}

std::vector<TkEnergy> tk_energy_check(const GridFunction& u, const QuadraticForm& q,
                                      const std::vector<double>& ks, double mu_tv) {
  std::vector<TkEnergy> out;
  for (double k : ks) {
    std::vector<double> t(u.values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::clamp(u.values[i], -k, k);
    const auto tv = view(t);
    TkEnergy e;
    e.k = k;
    e.energy = tv.dot(q.stiffness * tv);
    e.bound = k * mu_tv;
    e.ok = e.energy <= e.bound * (1.0 + 1e-2);
    out.push_back(e);
  }
  return out;
}

std::vector<TkEnergy> tk_energy_check(const GridFunction& u, const std::vector<double>& ks,
                                      double mu_tv) {
  QuadraticForm q;
  q.grid = u.grid;
  q.stiffness = dirichlet_stiffness(*u.grid);
  return tk_energy_check(u, q, ks, mu_tv);
}

}  // namespace smeq
