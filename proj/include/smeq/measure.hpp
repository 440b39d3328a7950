#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "smeq/geometry.hpp"

namespace smeq {

class GreenKernel;

/// Factor |x - center|^-beta of a density term.
struct PowerFactor {
  Point center;
  double beta = 0.0;
};

/// coeff * prod_k |x - c_k|^-beta_k, optionally times a smooth function.
/// A term without factors or function is a constant.
struct DensityTerm {
  double coeff = 1.0;
  std::vector<PowerFactor> factors;
  std::function<double(const Point&)> fn;

  double operator()(const Point& x) const;
  /// Value at base + offset, resolving |offset| exactly near factor centres.
  double at(const Point& base, const Point& offset) const;
  bool is_constant() const { return factors.empty() && !fn; }
};

struct Atom {
  Point at;
  double weight = 0.0;
};

struct Circle {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

struct Segment {
  Point p{0.0, 0.0};
  Point q{1.0, 0.0};
};

/// Curve-supported component with density (w.r.t. arc length) given by `density`.
struct CurveComponent {
  std::variant<Circle, Segment> support;
  DensityTerm density;

  double length() const;
  /// Point at arc-length parameter s in [0, length()].
  Point at(double s) const;
  double distance_to(const Point& x) const;
  /// Arc-length parameter of the curve point nearest to x.
  double nearest_parameter(const Point& x) const;
};

/// A signed measure: density terms (summed) + atoms + curve components.
/// `density_cap` caps the summed density pointwise; it is only meaningful for
/// nonnegative densities and is set by truncate().
struct MeasureSpec {
  std::vector<DensityTerm> density;
  std::vector<Atom> atoms;
  std::vector<CurveComponent> curves;
  double density_cap = std::numeric_limits<double>::infinity();
  /// Optional bounded factor applied after the cap (set by times()).
  std::function<double(const Point&)> multiplier;

  static MeasureSpec zero() { return {}; }
  static MeasureSpec lebesgue(double c = 1.0);
  static MeasureSpec dirac(const Point& x, double weight = 1.0);
  static MeasureSpec function(std::function<double(const Point&)> f);
  static MeasureSpec power(const Point& center, double beta, double coeff = 1.0);

  bool has_density() const { return !density.empty(); }
  bool empty() const { return density.empty() && atoms.empty() && curves.empty(); }
  double density_at(const Point& x) const;
  double density_at(const Point& base, const Point& offset) const;
  /// True when the density is a single constant (no singular factors, no function).
  std::optional<double> constant_density() const;
  /// Centres of all power factors, deduplicated.
  std::vector<Point> singular_centers() const;

  MeasureSpec& operator+=(const MeasureSpec& other);
  /// Measure f·m for this measure m (f bounded); used for the Revuz pairing.
  MeasureSpec times(const std::function<double(const Point&)>& f) const;
};

MeasureSpec operator+(MeasureSpec a, const MeasureSpec& b);

/// Declared local behaviour c |x - x_j|^-beta of a potential density.
struct SingularPoint {
  Point at;
  double beta = 0.0;
  double coeff = 0.0;
};

/// Nonnegative potential measure with declared singular points.
class PotentialMeasure {
 public:
  /// Singular points are read off the power factors of `base`.
  PotentialMeasure(MeasureSpec base, int dimension);
  PotentialMeasure(MeasureSpec base, std::vector<SingularPoint> singular, int dimension);
  static PotentialMeasure zero(int dimension) { return PotentialMeasure(MeasureSpec{}, dimension); }

  const MeasureSpec& base() const { return base_; }
  const std::vector<SingularPoint>& singular_points() const { return singular_; }
  int dimension() const { return dim_; }
  double level() const { return base_.density_cap; }
  bool is_truncated() const { return std::isfinite(base_.density_cap); }
  bool empty() const { return base_.empty(); }

 private:
  MeasureSpec base_;
  std::vector<SingularPoint> singular_;
  int dim_ = 1;
};

/// Per-singular-point shell table behind an N_nu decision.
struct ShellDiagnostic {
  Point at;
  double beta = 0.0;
  double r0 = 0.0;
  std::vector<double> shells;     // s_k = integral over r_{k+1} < |y - x_j| <= r_k
  std::vector<double> ball_tail;  // partial sums of s_k from k to the deepest shell
  double rate = 0.0;              // extrapolated decay exponent of s_k (per halving)
  double log_power = 0.0;         // extrapolated power of k multiplying the decay
  bool rule_divergent = false;
  bool numeric_divergent = false;
};

struct Classification {
  std::vector<Point> n_nu;
  std::vector<ShellDiagnostic> diagnostics;
  bool in_n_nu(const Point& x) const;
};

/// Total variation with relative tolerance 1e-6; throws "not-bounded-measure"
/// when a density term is not integrable.
double total_variation(const MeasureSpec& m, const Domain& d);

struct Decomposition {
  MeasureSpec diffuse;
  MeasureSpec concentrated;
};
Decomposition decompose(const MeasureSpec& m, const Domain& d);

Classification classify_singular_set(const PotentialMeasure& nu, const GreenKernel& k);

/// Removes the atoms of m located at points of N_nu.
MeasureSpec reduce(const MeasureSpec& m, const Classification& c);

/// |mu_c|(N_nu): total concentrated mass sitting on exceptional points.
double concentrated_mass_on(const MeasureSpec& m, const Domain& d, const Classification& c);

PotentialMeasure truncate(const PotentialMeasure& nu, double level);

/// Validation helpers shared with the config reader.
void check_supported(const MeasureSpec& m, const Domain& d, const std::string& what);

/// Lumped nodal masses of m on the grid: cell integrals of the density,
/// atoms split by linear (1D) or bilinear (2D) interpolation weights, curves
/// deposited on nearest nodes by arc-length quadrature.
std::vector<double> lumped_masses(const MeasureSpec& m, const Domain& d, const Grid& g);

/// Arc-length quadrature nodes and weights (weight includes the curve density).
struct CurveSample {
  Point at;
  double weight = 0.0;
};
std::vector<CurveSample> sample_curve(const CurveComponent& c, double spacing);

}  // namespace smeq
