#pragma once

#include <map>
#include <string>
#include <vector>

#include "pqlab/integrand.hpp"

namespace pqlab {

struct SampleSpec {
  int count = 10000;
  double zmin = 1e-3;
  double zmax = 1e2;
  unsigned long long seed = 1;
  /// Lattice refinement level for the exchange-condition surrogate.
  int refine = 0;
};

struct Violation {
  Point x{};
  Mat z;
  Mat w;  // second matrix argument, or the minimizing lattice point for H4 encoded as 1 x 2
  double slack = 0.0;
};

/// One ball of the exchange-condition surrogate and its minimizing lattice point.
struct ExchangeWitness {
  Point center{};
  double radius = 0.0;
  Point y_hat{};
  double slack = 0.0;
};

struct HypothesisReport {
  HypothesisId id = HypothesisId::kH1;
  std::string integrand;
  int sample_count = 0;
  unsigned long long seed = 0;
  std::vector<Violation> violations;
  std::map<std::string, double> fitted;
  std::vector<ExchangeWitness> witnesses;

  bool passed() const { return violations.empty(); }
};

/// Audits one hypothesis on seeded samples. A violation is a sample that needs a
/// constant beyond the declared one (nu, Lambda, or the integrand's declared bound
/// constants); fitted constants are the extremal values observed.
HypothesisReport check_hypothesis(const Integrand& f, HypothesisId id, const SampleSpec& spec);

/// Midpoint convexity on sampled pairs; returns the worst relative excess (<= 0 when convex).
double convexity_defect(const Integrand& f, const SampleSpec& spec);

/// Largest relative error between grad_z and central differences of eval, |z| <= zmax.
double gradient_consistency(const Integrand& f, const SampleSpec& spec, double zmax = 10.0);

}  // namespace pqlab
