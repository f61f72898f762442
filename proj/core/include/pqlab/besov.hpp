#pragma once

#include <optional>
#include <vector>

#include "pqlab/integrand.hpp"
#include "pqlab/mesh.hpp"

namespace pqlab {

struct ConeSpec {
  Point axis{1.0, 0.0};
  double aperture = 0.7853981633974483;  // pi/4
  double height = 0.1;

  /// Inward normal of the face nearest to x, aperture pi/4, height 0.1 diam.
  static ConeSpec inward(const Box& box, const Point& x);
  void validate(int dim) const;
  /// Unit directions of the sampled fan: axis rotated by aperture * {-1, -1/2, 0, 1/2, 1}.
  std::vector<Point> fan(int dim) const;
};

struct BesovSample {
  Point h{};
  double value = 0.0;  // int_{Omega_h} |v(x+h) - v(x)|^p dx / |h|^{sp}
};

struct BesovReport {
  double s = 0.0;
  double p = 0.0;
  double seminorm = 0.0;  // (sup_h value)^{1/p}
  Point argmax_h{};
  std::vector<BesovSample> samples;
  std::vector<double> stability;
};

/// Optional restriction of the integration region to a ball.
struct Ball {
  Point center{};
  double radius = 0.0;
};

/// Difference-quotient seminorm with |h| = height 2^{-j}, j < h_samples, over the
/// cone fan. Nodal trapezoid quadrature, P1 interpolation off the nodes.
BesovReport dq_seminorm(const DiscreteField& v, double s, double p, const ConeSpec& cone, int h_samples,
                        std::optional<Ball> region = std::nullopt);
/// Same for an element-wise constant field (e.g. Du); each element contributes
/// through four interior sample points.
BesovReport dq_seminorm(const ElementField& v, double s, double p, const ConeSpec& cone, int h_samples,
                        std::optional<Ball> region = std::nullopt);

/// phi v(. + h) + (1 - phi) v with phi = 1 on B_rho(x0), 0 outside B_{2 rho}(x0);
/// v is extended by zero outside the box.
DiscreteField translate_blend(const DiscreteField& v, const Point& h, const Point& center, double rho);
/// Cutoff used by translate_blend.
double cutoff(const Point& x, const Point& center, double rho);

struct AprioriExponents {
  double target_exponent = 0.0;    // np/(n - beta)
  double theta = 0.0;              // (np/beta)(1/p - 1/q), +inf when beta = 0
  double higher_order = 0.0;       // alpha / max(2, p)
  double q_supremum = 0.0;         // (n + alpha) p / n
  bool q_theta_below_p = false;    // q theta < p
  bool q_below_beta_threshold = false;  // q < (n + beta) p / n
};

AprioriExponents apriori_exponents(const GrowthParams& g, double beta);

/// p1 with s - n/p = -n/p1. Throws OutOfRange unless s - n/p < 0.
double embedding_exponent(double s, double p, int n);

}  // namespace pqlab
