#include "smeq/grid_function.hpp"

#include <algorithm>
#include <cmath>

#include "smeq/error.hpp"

namespace smeq {

namespace {

void check_same(const GridFunction& a, const GridFunction& b) {
  if (a.size() != b.size()) throw Error("size-mismatch", "grid functions live on different grids");
}

}  // namespace

double pairing(const GridFunction& a, const GridFunction& b) {
  check_same(a, b);
  const auto& w = a.grid->weights;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * b.values[i] * w[i];
  return s;
}

double pairing(const GridFunction& a, const std::function<double(const Point&)>& f) {
  const auto& g = *a.grid;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * f(g.nodes[i]) * g.weights[i];
  return s;
}

double l1_norm(const GridFunction& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.values[i]) * a.grid->weights[i];
  return s;
}

double linf_norm(const GridFunction& a) {
  double s = 0.0;
  for (double v : a.values) s = std::max(s, std::abs(v));
  return s;
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a.values[i] - b.values[i]) * a.grid->weights[i];
  return s;
}

double linf_distance(const GridFunction& a, const GridFunction& b) {
  check_same(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a.values[i] - b.values[i]));
  return s;
}

}  // namespace smeq
