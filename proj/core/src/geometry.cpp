#include "pqlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pqlab/errors.hpp"

namespace pqlab {

Box Box::unit(int dim) { return make(dim, {0.0, 0.0}, {1.0, dim == 2 ? 1.0 : 0.0}); }

Box Box::make(int dim, Point lo, Point hi) {
  Box b;
  b.dim = dim;
  b.lo = lo;
  b.hi = hi;
  if (dim == 1) b.lo[1] = b.hi[1] = 0.0;
  b.validate();
  return b;
}

double Box::diameter() const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += extent(a) * extent(a);
  return std::sqrt(s);
}

double Box::volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= extent(a);
  return v;
}

Point Box::center() const {
  Point c{0.0, 0.0};
  for (int a = 0; a < dim; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
  return c;
}

bool Box::contains(const Point& x, double tol) const {
  for (int a = 0; a < dim; ++a) {
    if (x[a] < lo[a] - tol || x[a] > hi[a] + tol) return false;
  }
  return true;
}

double Box::inset_distance(const Point& x) const {
  double d = INFINITY;
  for (int a = 0; a < dim; ++a) d = std::min({d, x[a] - lo[a], hi[a] - x[a]});
  return std::max(d, 0.0);
}

void Box::validate() const {
  if (dim != 1 && dim != 2) throw InvalidArgument("only dimensions 1 and 2 are supported");
  for (int a = 0; a < dim; ++a) {
    if (!std::isfinite(lo[a]) || !std::isfinite(hi[a]) || !(hi[a] > lo[a])) {
      throw InvalidArgument("box must have finite, strictly positive extents");
    }
  }
}

std::string Box::str() const {
  std::ostringstream os;
  os.precision(17);
  os << '(' << lo[0] << ',' << hi[0] << ')';
  if (dim == 2) os << "x(" << lo[1] << ',' << hi[1] << ')';
  return os.str();
}

}  // namespace pqlab
