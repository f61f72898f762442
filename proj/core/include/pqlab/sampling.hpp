#pragma once

#include <random>

#include "pqlab/geometry.hpp"
#include "pqlab/matrix.hpp"

namespace pqlab {

using Rng = std::mt19937_64;

/// Matrix with log-uniform Frobenius norm in [rmin, rmax] and uniform direction.
Mat sample_matrix(Rng& rng, int n, int m, double rmin, double rmax);
Point sample_point(Rng& rng, const Box& box);
double sample_uniform(Rng& rng, double lo, double hi);

}  // namespace pqlab
