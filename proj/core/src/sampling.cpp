#include "pqlab/sampling.hpp"

#include <cmath>

namespace pqlab {

double sample_uniform(Rng& rng, double lo, double hi) {
  // 53 random bits, independent of the standard library's distribution code
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

Mat sample_matrix(Rng& rng, int n, int m, double rmin, double rmax) {
  Mat z(n, m);
  double s = 0.0;
  do {
    s = 0.0;
    for (int k = 0; k < z.size(); ++k) {
      // Box-Muller keeps the stream portable across standard libraries
      const double u1 = sample_uniform(rng, 0.0, 1.0);
      const double u2 = sample_uniform(rng, 0.0, 1.0);
      z[k] = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
      s += z[k] * z[k];
    }
  } while (s < 1e-300);
  const double r = std::exp(sample_uniform(rng, std::log(rmin), std::log(rmax)));
  return z * (r / std::sqrt(s));
}

Point sample_point(Rng& rng, const Box& box) {
  Point x{0.0, 0.0};
  for (int a = 0; a < box.dim; ++a) x[a] = sample_uniform(rng, box.lo[a], box.hi[a]);
  return x;
}

}  // namespace pqlab
