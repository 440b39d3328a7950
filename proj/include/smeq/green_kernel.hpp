#pragma once

#include <Eigen/Dense>

#include "smeq/geometry.hpp"
#include "smeq/grid_function.hpp"
#include "smeq/measure.hpp"

namespace smeq {

/// Dirichlet Green function of -Δ + alpha on a model domain (alpha > 0 only
/// on intervals). Convention: -Δ G(., y) = δ_y.
class GreenKernel {
 public:
  explicit GreenKernel(Domain d, double alpha = 0.0);

  const Domain& domain() const { return domain_; }
  double alpha() const { return alpha_; }

  /// Checked evaluation: "outside-domain" for non-interior points,
  /// "on-diagonal" for x == y.
  double evaluate(const Point& x, const Point& y) const;

  /// Unchecked evaluation for interior x != y.
  double value(const Point& x, const Point& y) const;

  /// G(x, x + off) with the log singularity taken from |off| directly, so
  /// offsets far below the spacing of doubles near x stay accurate.
  double near(const Point& x, const Point& off) const;

  /// G(x,y) - (1/2π) ln(1/|x-y|) in 2D (finite at x = y); G itself in 1D.
  double regular_part(const Point& x, const Point& y) const;

 private:
  double rectangle_regular(const Point& x, const Point& y) const;

  Domain domain_;
  double alpha_ = 0.0;
  // Rectangle data in the orientation with width <= height.
  bool swap_ = false;
  double width_ = 1.0;
  double height_ = 1.0;
  double q_ = 0.0;
};

/// Symmetric kernel table: entry(i,j) = sym(i,j) * w_j, where sym(i,j) is
/// G(x_i,x_j) off the diagonal and the cell average of G(x_i, .) on it.
struct KernelMatrix {
  GridPtr grid;
  Eigen::MatrixXd sym;
  GreenKernel kernel;

  double alpha() const { return kernel.alpha(); }
  double entry(std::size_t i, std::size_t j) const {
    return sym(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * grid->weights[j];
  }
};

KernelMatrix assemble(const GreenKernel& k, GridPtr g);

/// ∫_box ln|y - x| dy in closed form (2D).
double log_box_integral(const Box& b, const Point& x);

/// Cell average (1/|cell|) ∫_{cell ∩ D} G(x, y) dy for a node x of the cell.
double cell_average(const GreenKernel& k, const Grid& g, std::size_t i);

/// Nodal values of Rμ. Densities enter through exact cell masses, atoms and
/// curve samples through exact kernel columns. Throws "atom-node-collision".
GridFunction apply_R(const KernelMatrix& k, const MeasureSpec& data);

/// Rμ at an arbitrary interior point, using the same discretization of the
/// density as apply_R plus refined quadrature in cells near x.
double potential_at(const KernelMatrix& k, const MeasureSpec& data, const Point& x);

/// Density of n R_n μ: solves (n W + K_stiff) w = n * (lumped μ).
GridFunction helmholtz_solve(const Domain& d, GridPtr g, double n, const MeasureSpec& data);

}  // namespace smeq
