#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "smeq/geometry.hpp"

namespace smeq {

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const Domain& d, std::initializer_list<int> resolution) {
  return std::make_shared<const Grid>(build_grid(d, resolution));
}
inline GridPtr make_grid(const Domain& d, std::span<const int> resolution) {
  return std::make_shared<const Grid>(build_grid(d, resolution));
}

/// Nodal values of a scalar field; pairing uses the grid quadrature weights.
struct GridFunction {
  GridPtr grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {}
  static GridFunction zeros(GridPtr g) {
    const std::size_t n = g->size();
    return GridFunction(std::move(g), std::vector<double>(n, 0.0));
  }
  static GridFunction sample(GridPtr g, const std::function<double(const Point&)>& f) {
    std::vector<double> v;
    v.reserve(g->size());
    for (const auto& x : g->nodes) v.push_back(f(x));
    return GridFunction(std::move(g), std::move(v));
  }

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// <a, b> = sum a_i b_i w_i.
double pairing(const GridFunction& a, const GridFunction& b);
double pairing(const GridFunction& a, const std::function<double(const Point&)>& f);
double l1_norm(const GridFunction& a);
double linf_norm(const GridFunction& a);
double l1_distance(const GridFunction& a, const GridFunction& b);
double linf_distance(const GridFunction& a, const GridFunction& b);

}  // namespace smeq
