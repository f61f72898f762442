#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pqlab/expression.hpp"
#include "pqlab/geometry.hpp"
#include "pqlab/matrix.hpp"

namespace pqlab {

struct GrowthParams {
  double p = 2.0;
  double q = 2.0;
  double alpha = 1.0;
  double mu = 0.0;
  double nu = 1.0;
  double Lambda = 1.0;
  int n = 2;
  int m = 1;

  /// Throws InvalidArgument unless 1 < p <= q, 0 < alpha <= 1, nu, Lambda > 0,
  /// mu >= 0, n in {1, 2}, 1 <= m <= 3 and q <= np/(n-p) when p < n.
  void validate() const;
  bool operator==(const GrowthParams&) const = default;
};

enum class Flavor { kAutonomous, kXDependent, kVariableExponent, kAnisotropic, kCombined };

enum class HypothesisId {
  kH1,
  kH1_1,
  kH1_2,
  kH1_3,
  kH2,
  kH3,
  kH4,
  kLowerBound,
  kDerivativeBound,
  kDualCoercivity,
};

std::string to_string(Flavor f);
std::string to_string(HypothesisId id);
HypothesisId parse_hypothesis(std::string_view name);

/// Pointwise energy density. Implementations are immutable.
class Density {
 public:
  virtual ~Density() = default;
  virtual double value(const Point& x, const Mat& z) const = 0;
  virtual Mat gradient(const Point& x, const Mat& z) const = 0;
};

using ParamMap = std::map<std::string, std::string>;

/// Serializable description of an integrand: a library name plus overrides.
struct IntegrandSpec {
  std::string name;
  ParamMap params;

  /// One `key = value` per line, `name` first, remaining keys sorted.
  std::string serialize() const;
  static IntegrandSpec parse(std::string_view text);
  bool operator==(const IntegrandSpec&) const = default;
};

/// Declared constants and metadata used by the hypothesis audits.
struct IntegrandTraits {
  std::vector<HypothesisId> declared;
  bool radial = false;
  /// Ball radius bound for the exchange condition; <= 0 means 0.25 diam(box).
  double eps0 = 0.0;
  std::optional<Expression> exponent_field;
  std::vector<Expression> row_exponents;
  std::map<std::string, Expression> weight_fields;
  double lower_bound_constant = 4.0;
  double derivative_constant = 0.0;  // 0 means 2 q Lambda
  double dual_coercivity_constant = 1e-3;
  double regularization = 0.0;
};

class Integrand {
 public:
  Integrand(IntegrandSpec spec, GrowthParams params, Flavor flavor,
            std::shared_ptr<const Density> density, IntegrandTraits traits, Box domain);

  /// Checked evaluation: non-finite x or z, or a shape mismatch, throws.
  double eval(const Point& x, const Mat& z) const;
  Mat grad_z(const Point& x, const Mat& z) const;

  /// Unchecked hot-path evaluation for the solver loops.
  double value(const Point& x, const Mat& z) const { return density_->value(x, z); }
  Mat gradient(const Point& x, const Mat& z) const { return density_->gradient(x, z); }

  const IntegrandSpec& spec() const { return spec_; }
  const std::string& name() const { return spec_.name; }
  const GrowthParams& params() const { return params_; }
  Flavor flavor() const { return flavor_; }
  const IntegrandTraits& traits() const { return traits_; }
  const Box& domain() const { return domain_; }
  bool radial() const { return traits_.radial; }
  double eps0() const;
  bool declares(HypothesisId id) const;
  const std::shared_ptr<const Density>& density() const { return density_; }

  /// Same density with different declared constants (used to build
  /// deliberately mis-declared integrands for negative controls).
  Integrand with_params(const GrowthParams& params) const;
  Integrand on_domain(const Box& domain) const;

 private:
  IntegrandSpec spec_;
  GrowthParams params_;
  Flavor flavor_;
  std::shared_ptr<const Density> density_;
  IntegrandTraits traits_;
  Box domain_;
};

/// F + eps |z|^q. Declared constants become (nu, Lambda + eps).
Integrand regularize(const Integrand& f, double epsilon);

/// Built-in densities: F1..F8, p-power, double-phase, px-laplacian,
/// anisotropic-px, log-growth, F7-max, composed-h. Every built-in vanishes at z = 0.
/// Recognized keys: n, m, p, q, alpha, mu, nu, Lambda, eps0, box, regularize,
/// and per-density weight/exponent fields (a, a1, a2, lambda, coupling, px, p1, p2).
Integrand example_library(std::string_view name, const ParamMap& params = {});
Integrand from_spec(const IntegrandSpec& spec);
std::vector<std::string> library_names();

/// (mu^2 + |z|^2)^((t-2)/4) z.
Mat v_functional(double mu, double t, const Mat& z);

/// Two-sided constants (lower, upper) in
/// |V(z1) - V(z2)|^2 ~ (mu^2 + |z1|^2 + |z2|^2)^((t-2)/2) |z1 - z2|^2 over seeded samples.
std::pair<double, double> v_equivalence_constants(double mu, double t, int n, int m, int samples,
                                                  unsigned long long seed);

/// Relative defect of the extremal Fenchel identity dF(z).z = F(z) + F*(dF(z)),
/// with the conjugate obtained by maximizing along the ray through z.
double fenchel_identity_check(const Integrand& f, const Point& x, const Mat& z);

}  // namespace pqlab
