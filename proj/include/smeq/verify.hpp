#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "smeq/config.hpp"
#include "smeq/fredholm.hpp"
#include "smeq/green_kernel.hpp"
#include "smeq/report.hpp"

namespace smeq {

struct TestFunction {
  std::string name;
  std::function<double(const Point&)> f;
  double sup = 1.0;  // sup of |f| over the domain
};

/// Frozen test-function battery: 1, x, x(1-x), Gaussian bumps at three
/// centres (coordinates normalized to the bounding box; radial analogues in 2D).
std::vector<TestFunction> test_battery(const Domain& d);

/// Eight nonnegative densities for the strong-duality residual: the battery
/// plus two extra monomials.
std::vector<TestFunction> density_battery(const Domain& d);

/// Five smooth bounded functions with |η''| <= e for narrow-convergence
/// tests: 1, x, x², x(1-x), exp(x) (normalized coordinates; 2D uses x+y
/// in place of x in the last three).
std::vector<TestFunction> narrow_battery(const Domain& d);

/// Piecewise-linear (1D) or bilinear (2D, full cells) interpolation of nodal
/// values, with zero Dirichlet data beyond the outermost nodes in 1D and
/// nearest-node fallback near a curved boundary.
double interpolate(const GridFunction& u, const Point& x);

struct StrongDuality {
  std::vector<double> residuals;  // relative, one per density
  std::vector<double> absolute;   // |lhs - rhs| before scaling
  double max_residual = 0.0;
  double threshold = 0.05;
  std::string expected;  // "small" or "bounded-away"
  std::string verdict;
  double concentrated_mass = 0.0;  // |μ_c|(N_ν)
  double exclusion_radius = 0.0;
};

/// Lazily built artifacts shared by the checks of one scenario.
class Session {
 public:
  explicit Session(Scenario s);

  const Scenario& scenario() const { return s_; }
  const Domain& domain() const { return s_.domain; }
  const PotentialMeasure& nu() const { return nu_; }
  GridPtr grid();
  const KernelMatrix& kernel();
  const Classification& classification();
  const SolveReport& solution();
  const StrongDuality& strong_duality();
  double mu_tv();
  /// ν truncated at the final solved level (ν itself without a ladder).
  PotentialMeasure final_potential();
  FredholmOptions fredholm_options() const;

 private:
  Scenario s_;
  PotentialMeasure nu_;
  GridPtr grid_;
  std::unique_ptr<KernelMatrix> kernel_;
  std::optional<Classification> cls_;
  std::optional<SolveReport> solve_;
  std::optional<StrongDuality> strong_;
  std::optional<double> tv_;
  std::shared_ptr<FactorCache> factors_ = make_factor_cache();
};

CheckRecord check_duality_pairing(Session& s);
CheckRecord check_strong_duality(Session& s);
CheckRecord check_regularity(Session& s);
CheckRecord check_existence_criterion(Session& s);
CheckRecord check_resolvent_identity(Session& s);
CheckRecord check_reduction_coherence(Session& s);

CheckRecord check_classification(Session& s);
CheckRecord check_mc_probes(Session& s);
CheckRecord check_variational_agreement(Session& s);
CheckRecord check_truncation_ladder(Session& s);
CheckRecord check_mollification_ladder(Session& s);

/// Runs a named check; exceptions become a failed record carrying the error.
CheckRecord run_check(Session& s, const std::string& name);

}  // namespace smeq
