#pragma once

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace smeq {

/// A point in R^1 or R^2. Unused trailing coordinates are zero.
struct Point {
  std::array<double, 2> c{0.0, 0.0};
  int dim = 1;

  Point() = default;
  explicit Point(double x) : c{x, 0.0}, dim(1) {}
  Point(double x, double y) : c{x, y}, dim(2) {}

  double operator[](int k) const { return c[static_cast<std::size_t>(k)]; }
  double& operator[](int k) { return c[static_cast<std::size_t>(k)]; }

  bool operator==(const Point&) const = default;
};

double distance(const Point& a, const Point& b);
double norm(const Point& a);
std::string to_string(const Point& p);

struct Interval {
  double a = 0.0;
  double b = 1.0;
};

struct Disk {
  Point center{0.0, 0.0};
  double radius = 1.0;
};

struct Rectangle {
  double a1 = 0.0, b1 = 1.0;
  double a2 = 0.0, b2 = 1.0;
};

/// Axis-aligned box [lo[0],hi[0]] x [lo[1],hi[1]] (second axis ignored in 1D).
struct Box {
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{0.0, 0.0};
};

/// First moments of a planar region: area and integrals of x and y.
struct RegionMoments {
  double area = 0.0;
  double mx = 0.0;
  double my = 0.0;
};

class Domain {
 public:
  using Shape = std::variant<Interval, Disk, Rectangle>;

  static Domain interval(double a, double b);
  static Domain disk(Point center, double radius);
  static Domain rectangle(double a1, double b1, double a2, double b2);

  const Shape& shape() const { return shape_; }
  int dimension() const;
  double volume() const;
  Box bounding_box() const;
  std::string describe() const;

  /// Throws Error("dimension-mismatch") when x has the wrong coordinate count.
  void check_dimension(const Point& x) const;

  /// Distance from x to the boundary, or a nonpositive value for exterior points.
  double signed_boundary_distance(const Point& x) const;

  /// Largest t >= 0 with x + s*dir inside the closure for all s in [0,t]
  /// (2D only; dir need not be normalized, t is measured in units of |dir|).
  double ray_exit(const Point& x, const Point& dir) const;

  /// Exact moments of box ∩ domain (2D only).
  RegionMoments clipped_moments(const Box& box) const;

  /// Length of the axis-aligned segment from p to q intersected with the domain (2D).
  double clipped_segment_length(const Point& p, const Point& q) const;

  /// Length of the domain boundary lying inside the closed box (2D).
  double boundary_length_in(const Box& box) const;

 private:
  explicit Domain(Shape s) : shape_(std::move(s)) {}
  Shape shape_;
};

bool contains(const Domain& d, const Point& x);

/// Euclidean distance from an interior point to the boundary.
/// Throws Error("outside-domain") for non-interior points.
double boundary_distance(const Domain& d, const Point& x);

/// Two-point flux connection between adjacent cells, used by the
/// finite-difference energy. `length` is the shared face measure
/// (1 in 1D), `distance` the node-to-node distance.
struct Face {
  int i = 0;
  int j = 0;
  double length = 0.0;
  double distance = 0.0;
};

/// Portion of the domain boundary owned by a cell.
struct BoundaryFace {
  int i = 0;
  double length = 0.0;
  double distance = 0.0;
};

/// Midpoint-rule tensor grid with cells clipped to the domain.
/// Node order is row-major over (axis-0 index, axis-1 index) and never changes.
struct Grid {
  std::vector<Point> nodes;
  std::vector<double> weights;
  std::array<int, 2> resolution{1, 1};
  std::array<double, 2> spacing{0.0, 0.0};
  std::array<double, 2> origin{0.0, 0.0};
  std::vector<std::array<int, 2>> lattice;  // per node
  std::vector<int> node_at;                 // lattice -> node or -1
  std::vector<Face> faces;
  std::vector<BoundaryFace> boundary_faces;
  int dim = 1;

  std::size_t size() const { return nodes.size(); }
  Box cell(std::size_t i) const;
  /// Node owning lattice cell (ix, iy), -1 when the cell is absent.
  int node_of_cell(int ix, int iy) const;
  /// Lattice cell whose closed box contains x (clamped to the lattice).
  std::array<int, 2> cell_index_of(const Point& x) const;
  /// Nearest node by Euclidean distance.
  std::size_t nearest_node(const Point& x) const;
  double total_weight() const;
};

/// Builds the midpoint grid. `resolution` holds one count per axis
/// (a single value is broadcast in 2D); every count must be >= 2.
Grid build_grid(const Domain& d, std::span<const int> resolution);
Grid build_grid(const Domain& d, std::initializer_list<int> resolution);

}  // namespace smeq
