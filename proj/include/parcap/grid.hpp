#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "parcap/geometry.hpp"

namespace parcap {

/// Uniform tensor grid with nodes lo + i*h, i = 0..n-1 on every axis.
/// Flat indices are row-major with the last axis fastest.
struct UniformGrid {
  Point lo;
  double h = 0.0;
  std::vector<int> n;

  /// Grid covering [lo, hi] with spacing as close to h as possible from below.
  static UniformGrid covering(const Point& lo, const Point& hi, double h);
  /// Grid with n nodes per axis, spacing h, centered at `center`.
  static UniformGrid centered(const Point& center, double h, std::vector<int> n);

  int dim() const { return static_cast<int>(n.size()); }
  std::size_t size() const;
  Point hi() const;
  Point node(std::size_t flat) const;
  std::vector<int> multi_index(std::size_t flat) const;
  std::size_t flat_index(const std::vector<int>& idx) const;
  /// Index of the node nearest to x (clamped to the grid).
  std::size_t nearest(const Point& x) const;
  /// Cell volume h^N.
  double cell_volume() const;
};

/// Real values on a UniformGrid, optionally stamped with a time.
struct GridFunction {
  UniformGrid grid;
  std::vector<double> values;
  std::optional<double> time;
  bool nonnegative = false;

  GridFunction() = default;
  GridFunction(UniformGrid g, double fill = 0.0);
  GridFunction(UniformGrid g, std::vector<double> v, std::optional<double> t = std::nullopt);

  /// Throws InvalidArgument if shape, finiteness or the nonnegativity flag is violated.
  void validate() const;
  /// Riemann sum h^N * Σ values.
  double integral() const;
  double max() const;
  double min() const;
};

struct Atom {
  Point location;
  double mass = 0.0;
};

/// Nonnegative measure: atoms plus an optional grid density.
struct RadonMeasure {
  std::vector<Atom> atoms;
  std::optional<GridFunction> density;

  static RadonMeasure zero() { return {}; }
  static RadonMeasure dirac(Point at, double mass = 1.0);

  void validate() const;
  double total_mass() const;
  RadonMeasure scaled(double lambda) const;
  bool is_zero() const { return total_mass() == 0.0; }
};

/// Nodes that represent K on the grid. In 1-D every interval collects the
/// nodes in [lo - tol, hi + tol] and falls back to its nearest node; in
/// higher dimensions nodes pass a membership test and isolated points are
/// snapped to their nearest node. Sorted, unique.
std::vector<std::size_t> mark_nodes(const UniformGrid& grid, const ClosedSet& K, double tol);

/// Multilinear interpolation of f at x; 0 outside the grid box.
double interpolate(const GridFunction& f, const Point& x);

}  // namespace parcap
