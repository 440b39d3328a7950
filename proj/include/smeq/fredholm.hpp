#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "smeq/green_kernel.hpp"
#include "smeq/grid_function.hpp"
#include "smeq/measure.hpp"

namespace smeq {

struct SolveReport {
  GridFunction solution;
  std::vector<double> truncation_levels;  // levels actually solved
  std::vector<double> l1_deltas;          // ||u_n - u_{n-1}||_L1, one per level after the first
  std::vector<GridFunction> ladder;       // solution at every solved level
  double nu_mass_of_u = 0.0;              // ∫|u| dν at the final level
  std::string stop_reason;                // "converged", "levels-exhausted" or "single-level"
  std::string method;                     // "dense-lu" or "pcg"
  std::map<std::string, double> residuals;
};

/// Dense factorizations keyed by the nodal ν masses, shared between solves
/// on one kernel table.
struct FactorCache;
std::shared_ptr<FactorCache> make_factor_cache();

struct FredholmOptions {
  /// Dense LU up to this many nodes, preconditioned CG beyond.
  std::size_t dense_limit = 4096;
  double cg_tol = 1e-11;
  /// Stop the ladder once the L1 delta falls below this times ||μ||_TV.
  double stop_factor = 1e-4;
  bool stop_early = true;
  std::shared_ptr<FactorCache> factors;
};

/// Duality solution for one truncated potential: (I + sym * M) u = R mu.
GridFunction solve_level(const KernelMatrix& k, const std::vector<double>& nu_mass,
                         const GridFunction& rhs, const FredholmOptions& opt = {},
                         const GridFunction* warm = nullptr, std::string* method = nullptr);

SolveReport solve_duality(const KernelMatrix& k, const PotentialMeasure& nu, const MeasureSpec& mu,
                          const std::vector<double>& levels, const FredholmOptions& opt = {});
SolveReport solve_duality(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                          const MeasureSpec& mu, const std::vector<double>& levels,
                          const FredholmOptions& opt = {});

GridFunction solve_R_nu_eta(const KernelMatrix& k, const PotentialMeasure& nu,
                            const std::function<double(const Point&)>& eta,
                            const std::vector<double>& levels, const FredholmOptions& opt = {});
GridFunction solve_R_nu_eta(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                            const std::function<double(const Point&)>& eta,
                            const std::vector<double>& levels);

/// Relative L1 residual of Ř^ν η + R((Ř^ν η) ν) - R η at the final level.
/// R is applied with an independent refined quadrature (sub-cell Gauss rules,
/// piecewise-linear reconstruction of the solution in 1D), not with the
/// kernel table used by the solver.
double resolvent_identity_residual(const KernelMatrix& k, const PotentialMeasure& nu,
                                   const std::function<double(const Point&)>& eta,
                                   const std::vector<double>& levels, const FredholmOptions& opt = {});
double resolvent_identity_residual(const Domain& d, GridPtr g, const PotentialMeasure& nu,
                                   const std::function<double(const Point&)>& eta,
                                   const std::vector<double>& levels);

struct NeumannResult {
  GridFunction solution;
  int iterations = 0;
  double spectral_radius = 0.0;
};

/// Fixed-point iteration u <- Rμ - sym M u. Throws "series-divergent" when a
/// 50-step power iteration estimates the spectral radius of sym M at >= 1.
NeumannResult neumann_series_solve(const KernelMatrix& k, const PotentialMeasure& nu,
                                   const MeasureSpec& mu, int max_iter, double tol);

/// Nodal ν masses for the Fredholm and variational pipelines.
std::vector<double> potential_masses(const PotentialMeasure& nu, const Domain& d, const Grid& g);

}  // namespace smeq
