#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pqlab/covering.hpp"
#include "pqlab/integrand.hpp"
#include "pqlab/mesh.hpp"

namespace pqlab {

/// Radially symmetric unit-mass bump exp(-1/(1-t^2)) supported in |y| < radius.
class Kernel {
 public:
  Kernel(int dim, double radius);
  double radius() const { return radius_; }
  /// Density at distance r from the origin.
  double operator()(double r) const;
  /// Unnormalized profile on [0, 1).
  static double profile(double t);

 private:
  int dim_;
  double radius_;
  double scale_;
};

/// Interpolation exponent of the mollification error: 1 + n(1/q - 1/p) if p < n, n/q otherwise.
double theta_exponent(const GrowthParams& g);
/// Smallest admissible m: max(1, 1 / (theta - (n(q-1)/p)(1 - p/q))).
/// Throws OutOfRange when the bracket is not positive.
double m_threshold(const GrowthParams& g);

struct ApproximantConfig {
  double m_exponent = 0.0;
  double epsilon = 0.0;
  double theta = 0.0;

  /// m defaults to m_threshold + 0.5.
  static ApproximantConfig make(const GrowthParams& g, double epsilon,
                                std::optional<double> m = std::nullopt);
  /// Throws InvalidArgument unless m (theta - ...) > 1 strictly and epsilon > 0.
  void validate(const GrowthParams& g) const;
};

/// Field mollified on the interior; `defined` marks nodes at distance > epsilon
/// from the boundary. Other nodes keep the input values.
struct InteriorField {
  DiscreteField field;
  std::vector<std::uint8_t> defined;
};

InteriorField mollify(const DiscreteField& u, double epsilon);

/// W^{1,p} norm over the elements whose nodes are all defined.
double interior_sobolev_norm(const InteriorField& u, double exponent);

/// Nodal discrete convolution with kernel weights renormalized to unit discrete
/// mass. A radius of at most one cell returns u(node) exactly.
void convolve_node(const DiscreteField& u, int node, double radius, double* out);

/// sum_i (u * phi_{eps delta_i}) psi_i with eps delta_i clamped to [one cell, dist(K_i, boundary)).
DiscreteField wb_approximant(const DiscreteField& u, const PartitionOfUnity& pou,
                             const ApproximantConfig& config);

/// Nodal correction term sum_i (u * phi_{eps delta_i}) (x) (x) D psi_i(x), as an n x m matrix per node.
std::vector<Mat> correction_term(const DiscreteField& u, const PartitionOfUnity& pou,
                                 const ApproximantConfig& config);
double correction_norm(const DiscreteField& u, const PartitionOfUnity& pou,
                       const ApproximantConfig& config, double exponent);

/// Continuum version of the correction norm for a scalar field with one point
/// singularity, on a disc around that point. The inner convolutions use polar
/// Gauss quadrature centered at the singularity, with the kernel mass
/// renormalized under the same rule; the outer integral uses geometric rings.
struct ContinuumProbe {
  std::function<double(const Point&)> field;
  Point singular{};
  double window = 1e-3;
  double inner_cutoff = 1e-12;  // relative to window
  int rings_per_octave = 4;
  int angles = 64;
  int inner_radial = 24;
  int inner_angular = 32;
};
double correction_norm(const ContinuumProbe& probe, const PartitionOfUnity& pou,
                       const ApproximantConfig& config, double exponent);
/// (u * phi_radius)(x) by the probe's inner quadrature.
double convolve_point(const ContinuumProbe& probe, const Point& x, double radius);

struct SlopeFit {
  std::vector<double> x;
  std::vector<double> y;
  double slope = 0.0;
  double intercept = 0.0;
};
/// Least squares on (log x, log y).
SlopeFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

struct H4Defect {
  std::vector<double> defect;  // per node, 0 where not evaluated
  int evaluated = 0;
  double fitted_c = 0.0;  // 95th percentile of the nodal ratios, or the supplied constant
  double max_ratio = 0.0;
  double defect_p95 = 0.0;
  double defect_max = 0.0;
};

/// ratio(x) = F(x, (Du * phi)(x)) / (1 + (F(., Du) * phi)(x)) at nodes with
/// distance > epsilon from the boundary; defect = max(0, F(x, Du*phi) - C (1 + F(.,Du)*phi)).
H4Defect h4_commutation_defect(const Integrand& f, const DiscreteField& u, double epsilon,
                               std::optional<double> constant = std::nullopt);

/// s u(c + (x - c)/s); outside the box u - u(c) is extended homogeneously of degree one.
DiscreteField star_scale(const DiscreteField& u, double s);

struct MollifyStudyRow {
  double epsilon = 0.0;
  double distance = 0.0;  // |u_eps - u|_{W^{1,p}}
  double energy = 0.0;
  double boundary_deviation = 0.0;
};
std::vector<MollifyStudyRow> mollify_study(const Integrand& f, const DiscreteField& u,
                                           const PartitionOfUnity& pou, double m_exponent,
                                           const std::vector<double>& epsilons, double exponent);

}  // namespace pqlab
