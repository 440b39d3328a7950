#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "smeq/green_kernel.hpp"
#include "smeq/measure.hpp"

namespace smeq {

struct PathConfig {
  double dt = 1e-4;
  double max_time = 1e3;
  double shell_epsilon = 0.0;  // 0 selects the default 2 sqrt(dt)
  std::uint64_t seed = 1;
  std::size_t n_paths = 1000;

  double epsilon() const;
  /// Throws "invalid-path-config" when dt <= 0, epsilon < sqrt(dt) or n_paths == 0.
  void validate() const;
};

struct PCAFTrace {
  double exit_time = 0.0;
  std::vector<double> times;
  std::vector<double> A_values;
  bool blew_up = false;
  bool exited = true;  // false when max_time was reached first
};

struct MCEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
};

/// xoshiro256++ seeded through splitmix64 from (seed, path index), so path i
/// always sees the same stream whatever order paths are run in.
class PathRng {
 public:
  using result_type = std::uint64_t;
  PathRng(std::uint64_t seed, std::uint64_t path);
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();
  double uniform();  // in (0, 1)

 private:
  std::uint64_t s_[4];
};

constexpr double kBlowUp = 700.0;
constexpr double kRateCap = 1e12;

/// Occupation-rate form of a measure along paths: density read exactly from
/// its family (capped at kRateCap in absolute value), atoms and curves through
/// thin shells of half-width epsilon.
class RateFunctional {
 public:
  RateFunctional(const MeasureSpec& m, int dim, double epsilon);
  double operator()(const Point& x) const;
  bool empty() const { return empty_; }

  /// A path started exactly on a power-factor centre sees an infinite
  /// density there. The terms concerned are then integrated over the first
  /// step in expectation, E ∫_0^dt |B_s - x0|^-beta ds, which is finite
  /// iff beta < dim; the trapezoid handles the rest.
  struct SingularStart {
    bool active = false;
    double regular = 0.0;   // rate at x0 without the infinite terms
    double integral = 0.0;  // expected first-step integral of those terms
    std::vector<std::size_t> terms;
  };
  SingularStart singular_start(const Point& x0, double dt) const;
  /// Sum of the listed density terms at x (cap and multiplier applied).
  double terms_at(const std::vector<std::size_t>& terms, const Point& x) const;
  /// Integral of the rate over one step x0 -> x1 of length dt.
  double step(const SingularStart& s, double v0, const Point& x1, double v1, double dt) const;

 private:
  const MeasureSpec* m_;
  int dim_;
  double eps_;
  double atom_scale_;
  bool has_density_;
  bool empty_;
};

/// Results of one shared-path batch: est[p][j] estimates
/// E_x ∫_0^ζ e^{-αt} e^{-A^{ν_p}_t} dA^{μ_j}_t.
struct BatchResult {
  std::vector<std::vector<MCEstimate>> est;
  std::vector<std::size_t> blowups;  // paths whose A^{ν_p} exceeded kBlowUp
  double mean_exit_time = 0.0;
};

/// Per-path hook: integrals laid out as p * n_data + j.
using PathObserver = std::function<void(std::size_t path, const std::vector<double>& integrals)>;

BatchResult estimate_batch(const Domain& d, const Point& x0, const std::vector<const MeasureSpec*>& potentials,
                           const std::vector<const MeasureSpec*>& data, const PathConfig& cfg,
                           double discount = 0.0, const PathObserver& observer = {});

PCAFTrace simulate_path(const Domain& d, const Point& x0, const PotentialMeasure& nu, const PathConfig& cfg,
                        std::uint64_t path_index = 0);

MCEstimate estimate_R(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                      const PathConfig& cfg);
MCEstimate estimate_R_nu(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                         const PotentialMeasure& nu, const PathConfig& cfg);
MCEstimate estimate_phi(const Domain& d, const Point& x0, const PotentialMeasure& nu, const PathConfig& cfg);

struct RevuzResult {
  MCEstimate mc;
  double exact = 0.0;
};

/// E_x0 ∫ f dA^ν against ∫ G(x0,y) f(y) ν(dy).
/// Throws "revuz-undefined-at-exceptional-point" for x0 in N_ν.
RevuzResult revuz_check(const Domain& d, const Point& x0, const std::function<double(const Point&)>& f,
                        const PotentialMeasure& nu, const PathConfig& cfg, const GreenKernel& k);

/// ∫ G(x0,y) f(y) ν(dy) by singularity-aware quadrature.
double revuz_exact(const GreenKernel& k, const Point& x0, const std::function<double(const Point&)>& f,
                   const MeasureSpec& nu);

struct TruncationSweep {
  std::vector<MCEstimate> levels;  // one per truncation level
  MCEstimate full;                 // untruncated ν on the same paths
  std::size_t pathwise_violations = 0;
  double max_violation = 0.0;
};

TruncationSweep truncation_monotonicity_check(const Domain& d, const Point& x0, const PotentialMeasure& nu,
                                              const std::vector<double>& levels, const PathConfig& cfg,
                                              const std::function<double(const Point&)>& f = {});

}  // namespace smeq
