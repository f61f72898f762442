// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: pqlab_acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pqlab/besov.hpp"
#include "pqlab/covering.hpp"
#include "pqlab/hypothesis.hpp"
#include "pqlab/lavrentiev.hpp"
#include "pqlab/mollify.hpp"
#include "pqlab/report_json.hpp"
#include "pqlab/solver.hpp"

using namespace pqlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within(double value, double reference, double rel) { return std::abs(value - reference) <= rel * std::abs(reference); }

// All values inside a +-rel band around the midrange.
bool banded(const std::vector<double>& v, double rel) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return (*hi - *lo) <= rel * (*hi + *lo);
}

const Domain kSquare = Domain::of(Box::unit(2));

WBCover square_cover(int depth, double m) {
  WhitneyOptions o;
  o.depth = depth;
  return wb_enlarge(kSquare, whitney(kSquare, o), m, false);
}

// Reference problems shared by several criteria.
Integrand below_threshold() { return diagonal_double_phase(2.0, 2.5); }
VectorFunction smooth_datum() { return VectorFunction::parse("sin(3*x1)*x2"); }

DiscreteField singular_field(const Mesh& mesh, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> centre(0.3, 0.7), coef(-0.1, 0.1);
  const double x0 = centre(rng), y0 = centre(rng), c1 = coef(rng), c2 = coef(rng);
  return interpolate(mesh, VectorFunction(1, [=](const Point& x, double* out) {
                       out[0] = std::sqrt(std::hypot(x[0] - x0, x[1] - y0)) + c1 * std::sin(3.0 * x[0]) +
                                c2 * std::cos(2.0 * x[1]);
                     }));
}

Outcome covering_constants() {
  const WBCover cover = square_cover(8, 2.5);
  const CoverAudit& a = cover.audit;
  const bool ok = a.multiplicity <= 21 && a.multiplicity_bound == 21 && a.min_overlap_ratio >= 1.0 / 196.0 &&
                  a.distance_violations == 0 && a.min_distance_ratio >= 1.0 && a.passed();
  return {ok, fmt("cubes=%d (truncated %d) M=%d<=21 overlap=%.4f>=%.4f dist-ratio=%.3f>=1 violations=%d",
                  a.cube_count, a.truncated_count, a.multiplicity, a.min_overlap_ratio, 1.0 / 196.0,
                  a.min_distance_ratio, a.distance_violations)};
}

Outcome partition_of_unity() {
  const WBCover cover = square_cover(8, 2.5);
  const PartitionOfUnity pou(cover);
  const PouAudit pa = audit_partition(pou, 10000, 1);
  const double c8 = gradient_constant(pou);
  const double c6 = gradient_constant(PartitionOfUnity(square_cover(6, 2.5)));
  const bool ok = pa.max_sum_error <= 1e-9 && pa.lower_bound_violations == 0 && within(c8, c6, 0.10);
  return {ok, fmt("sum error=%.1e<=1e-9 min psi*M=%.3f>=1 gradient constant depth6=%.4f depth8=%.4f (%+.1f%%)",
                  pa.max_sum_error, pa.min_scaled_weight, c6, c8, 100.0 * (c8 / c6 - 1.0))};
}

Outcome hypothesis_audits() {
  SampleSpec spec;
  spec.count = 10000;
  spec.seed = 1;
  int audits = 0, failing = 0;
  std::string first;
  for (const std::string& name : library_names()) {
    const Integrand f = example_library(name);
    for (HypothesisId id : f.traits().declared) {
      ++audits;
      if (!check_hypothesis(f, id, spec).passed()) {
        ++failing;
        if (first.empty()) first = name + "/" + to_string(id);
      }
    }
  }
  const Integrand good = example_library("double-phase");
  GrowthParams broken = good.params();
  broken.p = broken.q;
  const std::size_t caught = check_hypothesis(good.with_params(broken), HypothesisId::kH1, spec).violations.size();
  return {failing == 0 && caught >= 1,
          fmt("%d declared audits, %d failing%s%s; broken integrand violations=%zu", audits, failing,
              first.empty() ? "" : " first ", first.c_str(), caught)};
}

Outcome analytic_minimiser() {
  bool ok = true;
  std::string detail;
  for (double p : {1.5, 2.0, 3.0}) {
    const Integrand f = example_library("p-power", {{"n", "1"}, {"p", format_double(p)}});
    const SolveResult r = minimize(f, Mesh::uniform(f.domain(), 64), VectorFunction::parse("x1"), std::nullopt, 0.0);
    const double err = std::abs(r.report.energy - 1.0);
    ok = ok && r.report.converged && err <= 1e-6;
    detail += fmt("1D p=%g |E-1|=%.1e ", p, err);
  }
  const Integrand f = example_library("p-power", {{"p", "2"}});
  const SolveResult r = minimize(f, Mesh::uniform(f.domain(), 64), VectorFunction::parse("x1"), std::nullopt, 0.0);
  const double err = std::abs(r.report.energy - 1.0);
  ok = ok && r.report.converged && err <= 1e-5;
  return {ok, detail + fmt("2D |E-1|=%.1e", err)};
}

PathResult reference_path() {
  const Integrand f = below_threshold();
  std::vector<double> eps;
  for (int k = 3; k <= 8; ++k) eps.push_back(std::ldexp(1.0, -k));
  return regularization_path(f, Mesh::uniform(f.domain(), 128), smooth_datum(), std::nullopt, eps);
}

Outcome path_convergence() {
  const PathReport r = reference_path().report;
  bool ok = !r.failed && r.entries.size() == 6;
  for (std::size_t k = 1; k < r.entries.size(); ++k) ok = ok && r.entries[k].report.energy <= r.entries[k - 1].report.energy;
  for (std::size_t k = 1; k < r.cauchy_defects.size(); ++k) ok = ok && r.cauchy_defects[k] < r.cauchy_defects[k - 1];
  ok = ok && !r.cauchy_defects.empty() && r.cauchy_defects.back() < 1e-2;
  return {ok, fmt("energies %.6f -> %.6f non-increasing, Cauchy defects %.2e -> %.2e (final < 1e-2)",
                  r.entries.front().report.energy, r.entries.back().report.energy, r.cauchy_defects.front(),
                  r.cauchy_defects.back())};
}

Outcome euler_lagrange() {
  const PathReport r = reference_path().report;
  double worst = 0.0;
  bool converged = !r.failed;
  std::vector<double> ratios;
  for (const PathEntry& e : r.entries) {
    converged = converged && e.report.converged;
    worst = std::max(worst, e.report.relative_residual);
    ratios.push_back(e.dual_ratio);
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  return {converged && worst <= 1e-6 && banded(ratios, 0.2),
          fmt("max relative residual=%.1e<=1e-6, dual ratio in [%.3f, %.3f] (band %.1f%% <= 20%%)", worst, *lo, *hi,
              100.0 * (*hi - *lo) / (*hi + *lo))};
}

Outcome mollification() {
  const Integrand f = below_threshold();
  const DiscreteField u = singular_field(Mesh::uniform(f.domain(), 256), 7);
  const double m = m_threshold(f.params()) + 0.5;
  const WBCover cover = square_cover(6, m);
  const PartitionOfUnity pou(cover);
  std::vector<double> eps;
  for (int k = -2; k <= 2; ++k) eps.push_back(std::ldexp(1.0, -k));
  const SequenceReport seq = sequence_criterion(f, u, pou, eps, m);
  double worst = 0.0;
  for (const SequenceEntry& e : seq.entries) {
    worst = std::max(worst, std::abs(e.energy - seq.reference_energy) / seq.reference_energy);
  }
  std::vector<double> cs;
  bool zero = true;
  for (double e : {0.0625, 0.03125, 0.015625}) {
    const H4Defect d = h4_commutation_defect(f, u, e);
    cs.push_back(d.fitted_c);
    zero = zero && d.defect_p95 == 0.0;
  }
  const auto [lo, hi] = std::minmax_element(cs.begin(), cs.end());
  return {seq.converges && worst <= 0.02 && zero && banded(cs, 0.1),
          fmt("energy deviation max=%.2e final=%.2e (<= 2%%), H4 defect p95=0: %s, fitted C in [%.4f, %.4f]", worst,
              seq.final_relative_error, zero ? "yes" : "no", *lo, *hi)};
}

Outcome theta_scaling() {
  GrowthParams g;
  g.n = 2;
  g.p = 2.0;
  g.q = 2.2;
  const double m = 3.5;
  WhitneyOptions o;
  o.depth = 8;
  const WBCover cover = wb_enlarge(kSquare, whitney(kSquare, o), m, true);
  const PartitionOfUnity pou(cover);
  // singular point in the middle of a partition band, where D psi is large
  const Point x0{0.625 - 0.0625 / 48.0, 0.53125};
  ContinuumProbe probe;
  probe.singular = x0;
  probe.window = 1e-3;
  probe.inner_cutoff = 1e-8;
  probe.rings_per_octave = 2;
  probe.angles = 32;
  probe.inner_radial = 16;
  probe.inner_angular = 24;
  probe.field = [x0](const Point& x) { return std::pow(std::hypot(x[0] - x0[0], x[1] - x0[1]), 0.05); };
  std::vector<double> es, ns;
  for (int k = 3; k <= 7; ++k) {
    const double e = std::ldexp(1.0, -k);
    es.push_back(e);
    ns.push_back(correction_norm(probe, pou, ApproximantConfig::make(g, e, m), g.q));
  }
  const double slope = loglog_fit(es, ns).slope;
  const double theta = theta_exponent(g);
  return {within(slope, theta, 0.15), fmt("slope=%.4f theta=%.4f (%+.1f%%, tolerance 15%%)", slope, theta,
                                          100.0 * (slope / theta - 1.0))};
}

std::vector<double> besov_ladder(const Integrand& f, const VectorFunction& g) {
  const double s = f.params().alpha / std::max(2.0, f.params().p);
  std::vector<double> out;
  for (int n : {64, 128, 256}) {
    const SolveResult r = minimize(f, Mesh::uniform(f.domain(), n), g, std::nullopt, 0.0);
    out.push_back(dq_seminorm(gradient(r.u), s, f.params().p, ConeSpec{}, 8).seminorm);
  }
  return out;
}

Outcome besov_diagnostics() {
  const std::vector<double> below = besov_ladder(below_threshold(), smooth_datum());
  const std::vector<double> above = besov_ladder(checkerboard_integrand(1.7, 3.5), checkerboard_datum());
  bool ok = true;
  for (int k = 1; k < 3; ++k) ok = ok && within(below[k], below[k - 1], 0.10) && above[k] >= 1.25 * above[k - 1];
  return {ok, fmt("below threshold %.4f %.4f %.4f (ratios %.3f %.3f, need within 10%%); checkerboard %.4f %.4f %.4f "
                  "(ratios %.3f %.3f, need >= 1.25)",
                  below[0], below[1], below[2], below[1] / below[0], below[2] / below[1], above[0], above[1], above[2],
                  above[1] / above[0], above[2] / above[1])};
}

const std::vector<int> kLadder{64, 128, 256};

Outcome gap_dichotomy() {
  bool ok = true;
  std::string detail;
  int autonomous = 0;
  std::vector<Integrand> cases;
  for (const std::string& name : library_names()) {
    Integrand f = example_library(name);
    if (f.flavor() == Flavor::kAutonomous && f.params().m == 1) cases.push_back(std::move(f));
  }
  // the library has a single autonomous scalar density; exercise it off p = 2 as well
  for (const char* p : {"1.5", "3"}) cases.push_back(example_library("p-power", {{"p", p}, {"q", p}}));
  for (const Integrand& f : cases) {
    ++autonomous;
    const GapReport r = estimate_gap(f, kLadder, smooth_datum());
    if (r.verdict != GapVerdict::kNoGap) {
      ok = false;
      detail += f.name() + " p=" + format_double(f.params().p) + ":" + to_string(r.verdict) + " ";
    }
  }
  detail += fmt("%d autonomous cases no-gap%s; ", autonomous, ok ? "" : " (failures above)");
  const GapReport below = estimate_gap(below_threshold(), kLadder, smooth_datum());
  ok = ok && below.verdict == GapVerdict::kNoGap;
  detail += "below threshold " + to_string(below.verdict) + "; checkerboard";
  std::vector<double> gaps;
  for (double q : {3.2, 3.5, 3.8}) {
    const GapReport r = estimate_gap(checkerboard_integrand(1.7, q), kLadder, checkerboard_datum());
    gaps.push_back(r.gap);
    if (q == 3.5) ok = ok && r.verdict == GapVerdict::kGap;
    detail += fmt(" q=%.1f %s gap=%.4e", q, to_string(r.verdict).c_str(), r.gap);
  }
  ok = ok && gaps[0] < gaps[1] && gaps[1] < gaps[2];
  return {ok, detail};
}

// Every report below is produced twice with the same seed and compared byte for byte.
std::vector<std::string> seeded_reports() {
  std::vector<std::string> out;
  const WBCover cover = square_cover(6, 2.5);
  out.push_back(dump(nlohmann::json(cover.audit)));
  out.push_back(dump(nlohmann::json(audit_partition(PartitionOfUnity(cover), 2000, 11))));
  SampleSpec spec;
  spec.count = 2000;
  spec.seed = 11;
  out.push_back(dump(nlohmann::json(check_hypothesis(example_library("double-phase"), HypothesisId::kH4, spec))));
  const Integrand f = below_threshold();
  const Mesh mesh = Mesh::uniform(f.domain(), 64);
  SolveOptions so;
  so.random_seed = 11;
  out.push_back(dump(nlohmann::json(minimize(f, mesh, smooth_datum(), std::nullopt, 0.0, so).report)));
  out.push_back(dump(nlohmann::json(
      regularization_path(f, mesh, smooth_datum(), std::nullopt, {0.125, 0.0625, 0.03125}).report)));
  const DiscreteField u = singular_field(mesh, 11);
  out.push_back(dump(nlohmann::json(mollify_study(f, u, PartitionOfUnity(cover), 2.5, {1.0, 0.5}, 2.0))));
  out.push_back(dump(nlohmann::json(dq_seminorm(gradient(u), 0.5, 2.0, ConeSpec{}, 8))));
  out.push_back(dump(nlohmann::json(estimate_gap(f, {32, 64}, smooth_datum()))));
  return out;
}

Outcome determinism() {
  const std::vector<std::string> a = seeded_reports();
  const std::vector<std::string> b = seeded_reports();
  int same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return {same == static_cast<int>(a.size()), fmt("%d/%zu reports byte-identical", same, a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    double budget;  // seconds
  };
  const std::vector<Criterion> criteria{
      {"covering constants", covering_constants, 10},
      {"partition of unity", partition_of_unity, 30},
      {"hypothesis audits", hypothesis_audits, 30},
      {"analytic minimiser", analytic_minimiser, 60},
      {"regularization path", path_convergence, 300},
      {"Euler-Lagrange residual", euler_lagrange, 300},
      {"mollification energies", mollification, 180},
      {"theta scaling", theta_scaling, 120},
      {"Besov diagnostics", besov_diagnostics, 300},
      {"gap dichotomy", gap_dichotomy, 900},
      {"determinism", determinism, 300},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::stoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.pass = o.pass && dt <= criteria[i].budget;
    std::printf("criterion %2d %s  %s: %s (%.1f s, budget %.0f s)\n", id, o.pass ? "PASS" : "FAIL",
                criteria[i].name.c_str(), o.detail.c_str(), dt, criteria[i].budget);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
