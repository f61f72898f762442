#include "pqlab/lavrentiev.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "pqlab/config.hpp"
#include "pqlab/errors.hpp"
#include "pqlab/mollify.hpp"

namespace pqlab {

std::string to_string(AdmissibleClass::Kind k) {
  return k == AdmissibleClass::Kind::kFull ? "full" : "conforming-smooth";
}

std::string to_string(GapVerdict v) {
  switch (v) {
    case GapVerdict::kNoGap:
      return "no-gap";
    case GapVerdict::kGap:
      return "gap";
    case GapVerdict::kInconclusive:
      break;
  }
  return "inconclusive";
}

namespace {

struct Trial {
  SolveResult result;
  double energy = 0.0;
  double q_norm = 0.0;
};

class LevelSolver {
 public:
  LevelSolver(const Integrand& f, const Mesh& mesh, const VectorFunction& g, const std::optional<DiscreteField>& src,
              const GapOptions& opts, int level, GapReport& report)
      : f_(f), mesh_(mesh), g_(g), src_(src), opts_(opts), level_(level), report_(report) {}

  Trial solve(double lambda, AdmissibleClass::Kind kind, const std::optional<DiscreteField>& warm) {
    SolveOptions o = opts_.solve;
    o.initial = warm;
    o.record_trace = false;
    Trial t{minimize(f_, mesh_, g_, src_, lambda, o)};
    if (!t.result.report.converged) {
      std::ostringstream msg;
      msg << "level " << level_ << " (" << to_string(kind) << ", lambda " << lambda
          << "): " << t.result.report.message;
      throw DiagnosticsError(msg.str());
    }
    t.energy = src_ ? energy(f_, t.result.u, *src_) : energy(f_, t.result.u);
    t.q_norm = lp_norm(gradient(t.result.u), f_.params().q);
    report_.path.push_back({level_, kind, lambda, t.energy, t.q_norm, t.result.report.iterations, true});
    return t;
  }

 private:
  const Integrand& f_;
  const Mesh& mesh_;
  const VectorFunction& g_;
  const std::optional<DiscreteField>& src_;
  const GapOptions& opts_;
  int level_;
  GapReport& report_;
};

double solve_tol(const GapOptions& opts, double e) { return opts.energy_tol * (1.0 + std::abs(e)); }

}  // namespace

GapReport estimate_gap(const Integrand& f, const std::vector<int>& resolutions, const VectorFunction& g,
                       const std::optional<VectorFunction>& source, const GapOptions& opts) {
  if (resolutions.size() < 2) throw InvalidArgument("estimate_gap: need at least two mesh levels");
  for (std::size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 1 || (i > 0 && resolutions[i] <= resolutions[i - 1])) {
      throw InvalidArgument("estimate_gap: resolutions must be positive and increasing");
    }
  }
  if (!(opts.cap_factor >= 1.0) || opts.bisection_steps < 0 || !(opts.energy_tol > 0.0)) {
    throw InvalidArgument("estimate_gap: bad options");
  }
  const double q = f.params().q;

  GapReport rep;
  std::optional<DiscreteField> prev_full, prev_smooth;
  double cap = 0.0;
  try {
    for (std::size_t lv = 0; lv < resolutions.size(); ++lv) {
      const Mesh mesh = Mesh::uniform(f.domain(), resolutions[lv]);
      std::optional<DiscreteField> src;
      if (source) src = interpolate(mesh, *source);
      LevelSolver solver(f, mesh, g, src, opts, static_cast<int>(lv), rep);

      GapLevel level;
      level.resolution = resolutions[lv];
      std::optional<DiscreteField> warm;
      if (prev_full) warm = prolong(*prev_full, mesh);
      Trial full = solver.solve(0.0, AdmissibleClass::Kind::kFull, warm);
      level.inf_full = full.energy;
      level.q_norm_full = full.q_norm;
      double bracket = 0.0;

      if (lv == 0) cap = opts.cap_factor * full.q_norm;
      level.cap = cap;
      if (full.q_norm <= cap) {
        level.inf_smooth = full.energy;
        level.q_norm_smooth = full.q_norm;
        prev_smooth = full.result.u;
      } else {
        level.cap_active = true;
        std::optional<DiscreteField> start = prolong(*prev_smooth, mesh);
        const double scale = (1.0 + std::abs(full.energy)) / std::pow(cap, q);
        double lo = 0.0, hi = 1e-6 * scale;
        double e_lo = full.energy;
        std::optional<Trial> feasible;
        for (int k = 0; k < 14; ++k, hi *= 10.0) {
          Trial t = solver.solve(hi, AdmissibleClass::Kind::kConformingSmooth, start);
          start = t.result.u;
          if (t.q_norm <= cap) {
            feasible = std::move(t);
            break;
          }
          lo = hi;
          e_lo = t.energy;
        }
        if (!feasible) throw DiagnosticsError("estimate_gap: no multiplier enforces the q-norm cap");
        for (int k = 0; k < opts.bisection_steps && lo > 0.0; ++k) {
          const double mid = std::sqrt(lo * hi);
          Trial t = solver.solve(mid, AdmissibleClass::Kind::kConformingSmooth, feasible->result.u);
          if (t.q_norm <= cap) {
            hi = mid;
            feasible = std::move(t);
          } else {
            lo = mid;
            e_lo = t.energy;
          }
        }
        level.lambda = hi;
        level.inf_smooth = feasible->energy;
        level.q_norm_smooth = feasible->q_norm;
        // the constrained infimum lies between the last infeasible and the feasible energy
        bracket = std::max(0.0, feasible->energy - e_lo);
        prev_smooth = feasible->result.u;
      }
      level.gap = level.inf_smooth - level.inf_full;
      level.tolerance = solve_tol(opts, level.inf_full) + solve_tol(opts, level.inf_smooth) + bracket;
      rep.levels.push_back(level);
      prev_full = std::move(full.result.u);
    }
  } catch (const std::exception& ex) {
    rep.verdict = GapVerdict::kInconclusive;
    rep.diagnostics = ex.what();
    if (!rep.levels.empty()) {
      rep.inf_full = rep.levels.back().inf_full;
      rep.inf_smooth = rep.levels.back().inf_smooth;
      rep.gap = rep.levels.back().gap;
    }
    return rep;
  }

  const GapLevel& fine = rep.levels.back();
  const GapLevel& prev = rep.levels[rep.levels.size() - 2];
  rep.inf_full = fine.inf_full;
  rep.inf_smooth = fine.inf_smooth;
  rep.gap = fine.gap;
  rep.threshold = opts.verdict_factor * fine.tolerance;
  for (const GapLevel& l : rep.levels) {
    if (l.gap < -l.tolerance) {
      rep.verdict = GapVerdict::kInconclusive;
      rep.diagnostics = "smooth-class infimum below the full-class infimum";
      return rep;
    }
  }
  if (fine.gap > rep.threshold && prev.gap > opts.verdict_factor * prev.tolerance) {
    rep.verdict = GapVerdict::kGap;
  } else if (fine.gap <= rep.threshold) {
    rep.verdict = GapVerdict::kNoGap;
  } else {
    rep.verdict = GapVerdict::kInconclusive;
    rep.diagnostics = "gap above threshold on the finest level only";
  }
  return rep;
}

double relaxed_energy_estimate(const GapReport& report) {
  if (report.levels.empty()) throw InvalidArgument("relaxed_energy_estimate: empty report");
  std::vector<double> h, e;
  for (const GapLevel& l : report.levels) {
    h.push_back(1.0 / l.resolution);
    e.push_back(l.inf_smooth);
  }
  return extrapolate_to_zero(h, e);
}

double relaxed_energy_estimate(const Integrand& f, const std::vector<int>& resolutions, const VectorFunction& g,
                               const std::optional<VectorFunction>& source, const GapOptions& opts) {
  const GapReport rep = estimate_gap(f, resolutions, g, source, opts);
  if (rep.verdict == GapVerdict::kInconclusive && !rep.diagnostics.empty() && rep.levels.size() < resolutions.size()) {
    throw DiagnosticsError("relaxed_energy_estimate: " + rep.diagnostics);
  }
  return relaxed_energy_estimate(rep);
}

SequenceReport sequence_criterion(const Integrand& f, const DiscreteField& u, const PartitionOfUnity& pou,
                                  const std::vector<double>& epsilons, std::optional<double> m_exponent,
                                  double tolerance) {
  const GrowthParams& gp = f.params();
  SequenceReport rep;
  rep.reference_energy = energy(f, u);
  ApproximantConfig cfg;
  cfg.theta = theta_exponent(gp);
  cfg.m_exponent = m_exponent ? *m_exponent : pou.cover().m_exponent;
  for (double eps : epsilons) {
    cfg.epsilon = eps;
    const DiscreteField ue = wb_approximant(u, pou, cfg);
    DiscreteField diff = ue;
    for (std::size_t i = 0; i < diff.values().size(); ++i) diff.values()[i] -= u.values()[i];
    rep.entries.push_back({eps, energy(f, ue), lp_norm(diff, gp.p), lp_norm(gradient(ue), gp.q)});
  }
  if (!rep.entries.empty()) {
    const double denom = std::max(std::abs(rep.reference_energy), 1e-300);
    rep.final_relative_error = std::abs(rep.entries.back().energy - rep.reference_energy) / denom;
    rep.converges = rep.final_relative_error <= tolerance;
  }
  return rep;
}

Integrand checkerboard_integrand(double p, double q, double alpha, double amplitude) {
  if (!(amplitude > 0.0)) throw InvalidArgument("checkerboard_integrand: amplitude must be positive");
  const std::string a = format_double(amplitude) +
                        " * min(dist_quadrant(0.5, 0.5, 1, 1), dist_quadrant(0.5, 0.5, -1, -1))^" +
                        format_double(alpha);
  return example_library("double-phase", {{"p", format_double(p)},
                                          {"q", format_double(q)},
                                          {"alpha", format_double(alpha)},
                                          {"a", a}});
}

VectorFunction checkerboard_datum() {
  return VectorFunction::parse(
      "min(1, max(0, 2 * atan2(x2 - 0.5, x1 - 0.5) / pi)) + "
      "min(1, max(0, -2 * atan2(x2 - 0.5, x1 - 0.5) / pi - 1))");
}

Integrand diagonal_double_phase(double p, double q, double alpha) {
  return example_library("double-phase", {{"p", format_double(p)},
                                          {"q", format_double(q)},
                                          {"alpha", format_double(alpha)},
                                          {"a", "max(0, x1 - x2)^" + format_double(alpha)}});
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "q,level,inf_full,inf_smooth,gap,verdict\n";
  os.precision(17);
  for (const SweepRow& r : rows) {
    for (const GapLevel& l : r.report.levels) {
      os << r.q << ',' << l.resolution << ',' << l.inf_full << ',' << l.inf_smooth << ',' << l.gap << ','
         << to_string(r.report.verdict) << '\n';
    }
  }
}

}  // namespace pqlab
