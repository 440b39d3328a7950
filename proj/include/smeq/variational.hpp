#pragma once

#include <optional>
#include <vector>

#include <Eigen/SparseCore>

#include "smeq/grid_function.hpp"
#include "smeq/measure.hpp"

namespace smeq {

/// Two-point-flux Dirichlet stiffness: eta^T K eta approximates ∫|∇eta|²
/// with zero boundary values (3-point / 5-point stencils on full cells).
Eigen::SparseMatrix<double> dirichlet_stiffness(const Grid& g);

struct QuadraticForm {
  GridPtr grid;
  Eigen::SparseMatrix<double> stiffness;
  std::vector<double> nu_mass;
  std::vector<double> load;
};

/// Builds E(eta) = ½ eta^T K eta + ½ Σ m_i eta_i² - load^T eta. The potential
/// is lumped exactly like the Fredholm pipeline; a potential with declared
/// singular points must be truncated first ("truncation-required").
QuadraticForm assemble_form(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                            const GridFunction& mu_density);

struct TkEnergy {
  double k = 0.0;
  double energy = 0.0;
  double bound = 0.0;
  bool ok = true;
};

struct EnergyReport {
  GridFunction minimizer;
  double energy_value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool probes_ok = true;
  std::vector<TkEnergy> tk_energies;
};

double energy(const QuadraticForm& q, const std::vector<double>& u);

/// Conjugate gradients on (K + M) u = load. Throws "cg-nonconvergence"
/// after 10 N iterations.
EnergyReport minimize(const QuadraticForm& q, double tol = 1e-10);

struct MollifiedStep {
  double n = 0.0;
  EnergyReport report;
  double mollified_mass = 0.0;
  double l1_to_previous = -1.0;   // negative for the first rung
  double l1_to_reference = -1.0;  // negative without a reference
};

/// For each n: density of n R_n μ via helmholtz_solve, then minimize.
/// `reference` (typically the Fredholm solution) is only used for reporting.
std::vector<MollifiedStep> mollify_and_solve(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                                             const MeasureSpec& mu, const std::vector<double>& n_ladder,
                                             double tol = 1e-10,
                                             const std::optional<GridFunction>& reference = std::nullopt);

/// Energies of T_k u = clamp(u, -k, k) against the bound k ||μ||_TV (1 + 1e-2).
std::vector<TkEnergy> tk_energy_check(const GridFunction& u, const QuadraticForm& q,
                                      const std::vector<double>& ks, double mu_tv);

/// Same check given only a grid (stiffness assembled internally).
std::vector<TkEnergy> tk_energy_check(const GridFunction& u, const std::vector<double>& ks,
                                      double mu_tv);

}  // namespace smeq
