#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pqlab/covering.hpp"
#include "pqlab/integrand.hpp"
#include "pqlab/mesh.hpp"
#include "pqlab/solver.hpp"

namespace pqlab {

struct AdmissibleClass {
  enum class Kind { kFull, kConformingSmooth };
  Kind kind = Kind::kFull;
  std::string description;
};

std::string to_string(AdmissibleClass::Kind k);

enum class GapVerdict { kNoGap, kGap, kInconclusive };
std::string to_string(GapVerdict v);

struct GapOptions {
  SolveOptions solve;
  /// Smooth class: |Du|_{L^q} may not exceed cap_factor times its coarse-level value.
  double cap_factor = 1.05;
  /// Bisection steps on log(lambda) once a feasible multiplier is bracketed.
  int bisection_steps = 10;
  /// Energy tolerance of a single solve, relative to 1 + |energy|.
  double energy_tol = 1e-6;
  double verdict_factor = 10.0;
};

/// One trial along the smooth-class penalty path (lambda = 0 is the unpenalized solve).
struct GapPathEntry {
  int level = 0;
  AdmissibleClass::Kind kind = AdmissibleClass::Kind::kFull;
  double lambda = 0.0;
  double energy = 0.0;  // energy of F without the penalty
  double q_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct GapLevel {
  int resolution = 0;
  double inf_full = 0.0;
  double inf_smooth = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;  // combined tolerance of the two infima
  double q_norm_full = 0.0;
  double q_norm_smooth = 0.0;
  double cap = 0.0;
  double lambda = 0.0;  // multiplier that enforces the cap (0 when inactive)
  bool cap_active = false;
};

struct GapReport {
  double inf_full = 0.0;  // finest level
  double inf_smooth = 0.0;
  double gap = 0.0;
  std::vector<GapLevel> levels;
  std::vector<GapPathEntry> path;
  GapVerdict verdict = GapVerdict::kInconclusive;
  double threshold = 0.0;  // verdict_factor times the finest combined tolerance
  std::string diagnostics;
};

/// Infima over the full class and the conforming-smooth class on each resolution of
/// the ladder (coarsest first, all on f.domain()). The smooth class on finer levels
/// consists of fields whose |Du|_q stays below the cap set on the coarsest level; the
/// constrained minimizer is found as the unconstrained minimizer of F + lambda |Du|^q
/// with the smallest feasible lambda, warm-started from the prolonged coarse field.
GapReport estimate_gap(const Integrand& f, const std::vector<int>& resolutions, const VectorFunction& g,
                       const std::optional<VectorFunction>& source = std::nullopt, const GapOptions& opts = {});

/// Smooth-class infimum extrapolated to zero mesh size over the ladder.
double relaxed_energy_estimate(const GapReport& report);
double relaxed_energy_estimate(const Integrand& f, const std::vector<int>& resolutions, const VectorFunction& g,
                               const std::optional<VectorFunction>& source = std::nullopt,
                               const GapOptions& opts = {});

struct SequenceEntry {
  double epsilon = 0.0;
  double energy = 0.0;
  double lp_defect = 0.0;  // |u_eps - u|_{L^p}
  double q_norm = 0.0;     // |Du_eps|_{L^q}
};

struct SequenceReport {
  double reference_energy = 0.0;  // int F(x, Du)
  std::vector<SequenceEntry> entries;
  double final_relative_error = 0.0;
  bool converges = false;  // energies reach the reference within the tolerance
};

/// Builds WB approximants of u along the epsilon ladder (decreasing) and compares their
/// energies with the energy of u.
SequenceReport sequence_criterion(const Integrand& f, const DiscreteField& u, const PartitionOfUnity& pou,
                                  const std::vector<double>& epsilons, std::optional<double> m_exponent = std::nullopt,
                                  double tolerance = 0.02);

/// Double phase |z|^p + A dist(x, Q++ u Q--)^alpha |z|^q on the unit square, where Q++ and
/// Q-- are the closed quadrants about the center. The weight vanishes on those two quadrants.
Integrand checkerboard_integrand(double p, double q, double alpha = 1.0, double amplitude = 100.0);
/// Angular datum about the center: ramps 0 -> 1 across Q++, equals 1 on Q-+, ramps 1 -> 0
/// across Q--, equals 0 on Q+-.
VectorFunction checkerboard_datum();
/// Double phase with weight max(0, x1 - x2)^alpha, vanishing on one diagonal half.
Integrand diagonal_double_phase(double p, double q, double alpha = 1.0);

struct SweepRow {
  double q = 0.0;
  GapReport report;
};
/// q, level, inf_full, inf_smooth, gap, verdict
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);

}  // namespace pqlab
