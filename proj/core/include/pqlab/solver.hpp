#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pqlab/integrand.hpp"
#include "pqlab/mesh.hpp"

namespace pqlab {

struct SolveOptions {
  /// Stop once the EL residual is below tol times the residual of the cold start, or
  /// below the round-off level of the element fluxes when that is larger.
  double tol = 1e-6;
  int max_iter = 10000;
  double armijo = 1e-4;
  double shrink = 0.5;
  /// Warm start; boundary values are overwritten by the datum.
  std::optional<DiscreteField> initial;
  /// Random interior perturbation of the cold start (uniform in +-amplitude).
  std::optional<unsigned long long> random_seed;
  double random_amplitude = 0.5;
  bool record_trace = true;
};

struct SolveReport {
  double energy = 0.0;
  double el_residual = 0.0;        // max over hat functions of |r_a| / |psi_a|_{L^1}
  double reference_residual = 0.0;  // same quantity at the cold start
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double epsilon = 0.0;
  NormLadder norms;
  std::vector<double> energy_trace;
  std::vector<double> residual_trace;
  std::string message;
};

struct SolveResult {
  DiscreteField u;
  SolveReport report;
};

/// Minimizes int F(x, Du) + eps |Du|^q - f.u over fields with boundary values g.
/// Descent directions come from a variable metric assembled from eigenvalue-floored
/// finite-difference element Hessians; steps use Armijo backtracking.
SolveResult minimize(const Integrand& f, const Mesh& mesh, const VectorFunction& g,
                     const std::optional<DiscreteField>& source, double epsilon,
                     const SolveOptions& opts = {});

/// max over interior hat functions (each component) of |int dF(x,Du).D psi - f psi| / |psi|_{L^1}.
double el_residual(const Integrand& f, const DiscreteField& u, const std::optional<DiscreteField>& source);

/// Gradient of the discrete energy with respect to every nodal value (Dirichlet entries included).
std::vector<double> energy_gradient(const Integrand& f, const DiscreteField& u,
                                    const std::optional<DiscreteField>& source);

struct DualNormCheck {
  double numerator = 0.0;  // int |dF(x, Du)|^{q'}
  double rhs = 0.0;        // 1 + int |f|^{q'} + |g|^q + |Dg|^q
  double ratio = 0.0;
};
DualNormCheck dual_norm_check(const Integrand& f, const DiscreteField& u,
                              const std::optional<DiscreteField>& source, const VectorFunction& g);

struct PathEntry {
  double epsilon = 0.0;
  SolveReport report;
  double dual_ratio = 0.0;
  double apriori_norm = 0.0;  // |Du|_{L^{np/(n-beta)}} with beta = alpha/2
};

struct PathReport {
  std::vector<PathEntry> entries;
  double limit_energy = 0.0;
  std::vector<double> cauchy_defects;  // |Du_k - Du_{k+1}|_{L^p}
  bool failed = false;
  std::string failure;
};

struct PathResult {
  PathReport report;
  std::vector<DiscreteField> fields;
};

/// Sequential warm-started solves along a strictly decreasing positive schedule.
PathResult regularization_path(const Integrand& f, const Mesh& mesh, const VectorFunction& g,
                               const std::optional<DiscreteField>& source,
                               const std::vector<double>& epsilons, const SolveOptions& opts = {});

/// eps_k = 2^{-k} / (1 + |D g_h|_q^q) for k in [k0, k1], g_h the blended boundary interpolant.
std::vector<double> default_schedule(const Integrand& f, const Mesh& mesh, const VectorFunction& g, int k0, int k1);

/// Value at 0 of the polynomial through the last (up to three) (eps, energy) pairs.
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values);

/// Cold start: boundary datum on the boundary, Coons blend inside.
DiscreteField boundary_interpolant(const Mesh& mesh, const VectorFunction& g);

}  // namespace pqlab
