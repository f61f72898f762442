#pragma once

#include <string>

#include "pqlab/matrix.hpp"

namespace pqlab {

/// Axis-aligned box in R^dim, dim in {1, 2}. Unused coordinates stay at 0.
struct Box {
  int dim = 2;
  Point lo{0.0, 0.0};
  Point hi{1.0, 1.0};

  static Box unit(int dim);
  static Box make(int dim, Point lo, Point hi);

  double extent(int axis) const { return hi[axis] - lo[axis]; }
  double diameter() const;
  double volume() const;
  Point center() const;
  bool contains(const Point& x, double tol = 0.0) const;
  /// Distance from an interior point to the boundary (0 outside).
  double inset_distance(const Point& x) const;
  void validate() const;
  bool operator==(const Box&) const = default;
  std::string str() const;
};

}  // namespace pqlab
