#include "pqlab/report_json.hpp"

#include <cmath>

namespace pqlab {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

namespace {

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

json point(const Point& p, int dim = 2) {
  json a = json::array();
  for (int i = 0; i < dim; ++i) a.push_back(number(p[i]));
  return a;
}

json keyed(const std::map<double, double>& m) {
  json o = json::object();
  for (const auto& [k, v] : m) o[format_double(k)] = number(v);
  return o;
}

}  // namespace

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void to_json(json& j, const Mat& m) {
  j = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int a = 0; a < m.cols(); ++a) row.push_back(number(m(i, a)));
    j.push_back(row);
  }
}

void to_json(json& j, const GrowthParams& g) {
  j = json{{"n", g.n},
           {"m", g.m},
           {"p", number(g.p)},
           {"q", number(g.q)},
           {"alpha", number(g.alpha)},
           {"mu", number(g.mu)},
           {"nu", number(g.nu)},
           {"Lambda", number(g.Lambda)}};
}

void to_json(json& j, const HypothesisReport& r) {
  json viol = json::array();
  for (const Violation& v : r.violations) {
    viol.push_back({{"x", point(v.x)}, {"z", v.z}, {"w", v.w}, {"slack", number(v.slack)}});
  }
  json fitted = json::object();
  for (const auto& [k, v] : r.fitted) fitted[k] = number(v);
  json wit = json::array();
  for (const ExchangeWitness& w : r.witnesses) {
    wit.push_back({{"center", point(w.center)},
                   {"radius", number(w.radius)},
                   {"y_hat", point(w.y_hat)},
                   {"slack", number(w.slack)}});
  }
  j = json{{"hypothesis", to_string(r.id)},
           {"integrand", r.integrand},
           {"samples", r.sample_count},
           {"seed", r.seed},
           {"passed", r.passed()},
           {"violation_count", r.violations.size()},
           {"violations", viol},
           {"fitted", fitted},
           {"witnesses", wit}};
}

void to_json(json& j, const CoverAudit& a) {
  j = json{{"cube_count", a.cube_count},
           {"truncated_count", a.truncated_count},
           {"multiplicity", a.multiplicity},
           {"multiplicity_bound", a.multiplicity_bound},
           {"min_overlap_ratio", number(a.min_overlap_ratio)},
           {"overlap_bound", number(a.overlap_bound)},
           {"min_distance_ratio", number(a.min_distance_ratio)},
           {"distance_violations", a.distance_violations},
           {"scale_comparable", a.scale_comparable},
           {"base_cubes_inside", a.base_cubes_inside},
           {"first_failure", a.first_failure},
           {"passed", a.passed()}};
}

void to_json(json& j, const PouAudit& a) {
  j = json{{"samples", a.samples},
           {"max_sum_error", number(a.max_sum_error)},
           {"min_scaled_weight", number(a.min_scaled_weight)},
           {"lower_bound_violations", a.lower_bound_violations}};
}

void to_json(json& j, const NormLadder& n) {
  j = json{{"u", keyed(n.u_norms)}, {"du", keyed(n.du_norms)}};
  if (n.besov_seminorm) j["besov_seminorm"] = number(*n.besov_seminorm);
}

void to_json(json& j, const SolveReport& r) {
  j = json{{"energy", number(r.energy)},
           {"el_residual", number(r.el_residual)},
           {"reference_residual", number(r.reference_residual)},
           {"relative_residual", number(r.relative_residual)},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"epsilon", number(r.epsilon)},
           {"norms", r.norms},
           {"energy_trace", numbers(r.energy_trace)},
           {"residual_trace", numbers(r.residual_trace)},
           {"message", r.message}};
}

void to_json(json& j, const PathReport& r) {
  json entries = json::array();
  for (const PathEntry& e : r.entries) {
    entries.push_back({{"epsilon", number(e.epsilon)},
                       {"solve", e.report},
                       {"dual_ratio", number(e.dual_ratio)},
                       {"apriori_norm", number(e.apriori_norm)}});
  }
  j = json{{"entries", entries},
           {"limit_energy", number(r.limit_energy)},
           {"cauchy_defects", numbers(r.cauchy_defects)},
           {"failed", r.failed},
           {"failure", r.failure}};
}

void to_json(json& j, const MollifyStudyRow& r) {
  j = json{{"epsilon", number(r.epsilon)},
           {"distance", number(r.distance)},
           {"energy", number(r.energy)},
           {"boundary_deviation", number(r.boundary_deviation)}};
}

void to_json(json& j, const H4Defect& d) {
  j = json{{"evaluated", d.evaluated},
           {"fitted_c", number(d.fitted_c)},
           {"max_ratio", number(d.max_ratio)},
           {"defect_p95", number(d.defect_p95)},
           {"defect_max", number(d.defect_max)}};
}

void to_json(json& j, const SlopeFit& f) {
  j = json{{"x", numbers(f.x)}, {"y", numbers(f.y)}, {"slope", number(f.slope)}, {"intercept", number(f.intercept)}};
}

void to_json(json& j, const BesovReport& r) {
  json samples = json::array();
  for (const BesovSample& s : r.samples) samples.push_back({{"h", point(s.h)}, {"value", number(s.value)}});
  j = json{{"s", number(r.s)},
           {"p", number(r.p)},
           {"seminorm", number(r.seminorm)},
           {"argmax_h", point(r.argmax_h)},
           {"samples", samples},
           {"stability", numbers(r.stability)}};
}

void to_json(json& j, const AprioriExponents& a) {
  j = json{{"target_exponent", number(a.target_exponent)},
           {"theta", number(a.theta)},
           {"higher_order", number(a.higher_order)},
           {"q_supremum", number(a.q_supremum)},
           {"q_theta_below_p", a.q_theta_below_p},
           {"q_below_beta_threshold", a.q_below_beta_threshold}};
}

void to_json(json& j, const GapLevel& l) {
  j = json{{"resolution", l.resolution},
           {"inf_full", number(l.inf_full)},
           {"inf_smooth", number(l.inf_smooth)},
           {"gap", number(l.gap)},
           {"tolerance", number(l.tolerance)},
           {"q_norm_full", number(l.q_norm_full)},
           {"q_norm_smooth", number(l.q_norm_smooth)},
           {"cap", number(l.cap)},
           {"lambda", number(l.lambda)},
           {"cap_active", l.cap_active}};
}

void to_json(json& j, const GapPathEntry& e) {
  j = json{{"level", e.level},
           {"class", to_string(e.kind)},
           {"lambda", number(e.lambda)},
           {"energy", number(e.energy)},
           {"q_norm", number(e.q_norm)},
           {"iterations", e.iterations},
           {"converged", e.converged}};
}

void to_json(json& j, const GapReport& r) {
  j = json{{"inf_full", number(r.inf_full)},
           {"inf_smooth", number(r.inf_smooth)},
           {"gap", number(r.gap)},
           {"levels", r.levels},
           {"path", r.path},
           {"verdict", to_string(r.verdict)},
           {"threshold", number(r.threshold)},
           {"diagnostics", r.diagnostics}};
}

void to_json(json& j, const SequenceReport& r) {
  json entries = json::array();
  for (const SequenceEntry& e : r.entries) {
    entries.push_back({{"epsilon", number(e.epsilon)},
                       {"energy", number(e.energy)},
                       {"lp_defect", number(e.lp_defect)},
                       {"q_norm", number(e.q_norm)}});
  }
  j = json{{"reference_energy", number(r.reference_energy)},
           {"entries", entries},
           {"final_relative_error", number(r.final_relative_error)},
           {"converges", r.converges}};
}

void to_json(json& j, const ExperimentConfig& c) {
  json integrand = json::object();
  integrand["name"] = c.integrand.name;
  for (const auto& [k, v] : c.integrand.params) integrand[k] = v;
  j = json{{"command", c.command},
           {"integrand", integrand},
           {"resolutions", c.resolutions},
           {"epsilons", numbers(c.epsilons)},
           {"seed", c.seed},
           {"threads", c.threads},
           {"tol", number(c.tol)},
           {"max_iter", c.max_iter},
           {"outputs", c.outputs},
           {"options", c.options}};
}

}  // namespace pqlab
