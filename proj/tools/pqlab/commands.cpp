#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "pqlab/besov.hpp"
#include "pqlab/covering.hpp"
#include "pqlab/hypothesis.hpp"
#include "pqlab/lavrentiev.hpp"
#include "pqlab/mollify.hpp"
#include "pqlab/report_json.hpp"
#include "pqlab/solver.hpp"

namespace pqlab::cli {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// option access

const std::string* find(const ExperimentConfig& cfg, const std::string& key) {
  auto it = cfg.options.find(key);
  return it == cfg.options.end() ? nullptr : &it->second;
}

double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) throw UsageError(key + ": not a number: '" + text + "'");
  return v;
}

std::string opt(const ExperimentConfig& cfg, const std::string& key, const std::string& fallback) {
  const std::string* v = find(cfg, key);
  return v ? *v : fallback;
}

double opt(const ExperimentConfig& cfg, const std::string& key, double fallback) {
  const std::string* v = find(cfg, key);
  return v ? to_double(key, *v) : fallback;
}

int opt_int(const ExperimentConfig& cfg, const std::string& key, int fallback) {
  const double v = opt(cfg, key, static_cast<double>(fallback));
  if (v != std::floor(v) || std::abs(v) > 1e9) throw UsageError(key + ": expected an integer");
  return static_cast<int>(v);
}

bool opt_flag(const ExperimentConfig& cfg, const std::string& key) {
  const std::string v = opt(cfg, key, std::string("0"));
  return v == "1" || v == "true" || v == "yes";
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::vector<double> opt_list(const ExperimentConfig& cfg, const std::string& key) {
  std::vector<double> out;
  if (const std::string* v = find(cfg, key)) {
    for (const std::string& w : words(*v)) out.push_back(to_double(key, w));
  }
  return out;
}

std::vector<int> ladder(const ExperimentConfig& cfg, std::vector<int> fallback) {
  return cfg.resolutions.empty() ? fallback : cfg.resolutions;
}

SolveOptions solve_options(const ExperimentConfig& cfg) {
  SolveOptions o;
  o.tol = cfg.tol;
  o.max_iter = cfg.max_iter;
  return o;
}

// ---------------------------------------------------------------------------
// integrands and data

bool is_checkerboard(const ExperimentConfig& cfg) { return cfg.integrand.name == "checkerboard"; }

/// `fallback` applies when the config names no integrand; explicit parameters still override it.
Integrand make_integrand(const ExperimentConfig& cfg, const IntegrandSpec& fallback) {
  if (is_checkerboard(cfg)) {
    const ParamMap& p = cfg.integrand.params;
    auto get = [&](const char* k, double d) { return p.count(k) ? to_double(k, p.at(k)) : d; };
    for (const auto& [k, v] : p) {
      if (k != "p" && k != "q" && k != "alpha" && k != "amplitude") {
        throw UsageError("checkerboard takes p, q, alpha and amplitude only (got " + k + ")");
      }
    }
    return checkerboard_integrand(get("p", 1.7), get("q", 3.5), get("alpha", 1.0), get("amplitude", 100.0));
  }
  IntegrandSpec spec = cfg.integrand.name.empty() ? fallback : cfg.integrand;
  if (cfg.integrand.name.empty()) {
    for (const auto& [k, v] : cfg.integrand.params) spec.params[k] = v;
  }
  return from_spec(spec);
}

Integrand with_q(const ExperimentConfig& cfg, const Integrand& f, double q) {
  if (is_checkerboard(cfg)) {
    ExperimentConfig c = cfg;
    c.integrand.params["q"] = format_double(q);
    return make_integrand(c, {});
  }
  IntegrandSpec spec = f.spec();
  spec.params["q"] = format_double(q);
  return from_spec(spec);
}

const IntegrandSpec kBelowThreshold{"double-phase", {{"p", "2"}, {"q", "2.5"}, {"a", "max(0, x1 - x2)^1"}}};

VectorFunction datum(const ExperimentConfig& cfg, const Integrand& f, const std::string& fallback) {
  if (const std::string* g = find(cfg, "g")) return VectorFunction::parse(*g);
  if (is_checkerboard(cfg)) return checkerboard_datum();
  if (!fallback.empty()) return VectorFunction::parse(fallback);
  std::string zero = "0";
  for (int c = 1; c < f.params().m; ++c) zero += "; 0";
  return VectorFunction::parse(zero);
}

std::optional<DiscreteField> source(const ExperimentConfig& cfg, const Mesh& mesh) {
  if (const std::string* f = find(cfg, "f")) return interpolate(mesh, VectorFunction::parse(*f));
  return std::nullopt;
}

json spec_json(const IntegrandSpec& s) {
  json j = json::object();
  j["name"] = s.name;
  for (const auto& [k, v] : s.params) j[k] = v;
  return j;
}

// ---------------------------------------------------------------------------
// artifacts

std::filesystem::path artifact(const Context& ctx, const std::string& kind) {
  auto it = ctx.cfg.outputs.find(kind);
  const std::string name = it != ctx.cfg.outputs.end() ? it->second : ctx.cfg.command + "." + kind;
  return ctx.out_dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + path.string());
}

json envelope(const Context& ctx) { return json{{"command", ctx.cfg.command}, {"config", ctx.cfg}}; }

void write_json(const Context& ctx, const json& j) { write_text(artifact(ctx, "json"), dump(j)); }

void write_config(const Context& ctx) { write_text(ctx.out_dir / (ctx.cfg.command + ".cfg"), ctx.cfg.serialize()); }

void say(const Context& ctx, const char* fmt, ...) {
  if (ctx.quiet) return;
  va_list args;
  va_start(args, fmt);
  std::vfprintf(stdout, fmt, args);
  va_end(args);
  std::fputc('\n', stdout);
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : (std::isnan(v) ? "nan" : v > 0 ? "inf" : "-inf"); }

// ---------------------------------------------------------------------------
// commands

int cmd_check(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand f = make_integrand(cfg, {"double-phase", {}});
  std::vector<HypothesisId> ids;
  if (const std::string* h = find(cfg, "hyp")) {
    for (const std::string& w : words(*h)) ids.push_back(parse_hypothesis(w));
  } else {
    ids = f.traits().declared;
  }
  if (ids.empty()) throw UsageError("no hypotheses to check");
  SampleSpec spec;
  spec.count = opt_int(cfg, "samples", spec.count);
  spec.zmin = opt(cfg, "zmin", spec.zmin);
  spec.zmax = opt(cfg, "zmax", spec.zmax);
  spec.seed = cfg.seed;

  json reports = json::array();
  std::string line;
  std::size_t violations = 0;
  int samples = 0;
  for (HypothesisId id : ids) {
    const HypothesisReport r = check_hypothesis(f, id, spec);
    reports.push_back(r);
    violations += r.violations.size();
    samples += r.sample_count;
    line += (line.empty() ? "" : ", ") + to_string(id) + (r.passed() ? " ok" : " FAILED");
  }
  json j = envelope(ctx);
  j["integrand"] = spec_json(f.spec());
  j["params"] = f.params();
  j["reports"] = reports;
  j["violations"] = violations;
  write_json(ctx, j);
  say(ctx, "check %s: %s; %zu violations in %d samples -> %s", f.name().c_str(), line.c_str(), violations, samples,
      artifact(ctx, "json").c_str());
  return violations == 0 ? kOk : kInvariantViolation;
}

int cmd_solve(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand f = make_integrand(cfg, {"p-power", {}});
  const int n = ladder(cfg, {64}).front();
  const Mesh mesh = Mesh::uniform(f.domain(), n);
  const VectorFunction g = datum(cfg, f, "");
  const std::optional<DiscreteField> src = source(cfg, mesh);
  SolveOptions so = solve_options(cfg);
  if (opt_flag(cfg, "random_start")) so.random_seed = cfg.seed;
  const double eps = opt(cfg, "epsilon", 0.0);
  const SolveResult r = minimize(f, mesh, g, src, eps, so);

  json j = envelope(ctx);
  j["integrand"] = spec_json(f.spec());
  j["resolution"] = n;
  j["report"] = r.report;
  const DualNormCheck d = dual_norm_check(f, r.u, src, g);
  j["dual_norm"] = {{"numerator", number(d.numerator)}, {"rhs", number(d.rhs)}, {"ratio", number(d.ratio)}};
  write_json(ctx, j);
  if (opt_flag(cfg, "dump")) {
    std::ostringstream csv, bin;
    write_csv(r.u, csv);
    write_binary(r.u, bin);
    write_text(artifact(ctx, "csv"), csv.str());
    write_text(ctx.out_dir / (cfg.command + ".bin"), bin.str());
  }
  say(ctx, "solve %s N=%d: energy=%.12g residual=%.3e (relative %.3e) iterations=%d %s -> %s", f.name().c_str(), n,
      r.report.energy, r.report.el_residual, r.report.relative_residual, r.report.iterations,
      r.report.converged ? "converged" : "NOT converged", artifact(ctx, "json").c_str());
  return r.report.converged ? kOk : kInvariantViolation;
}

int cmd_path(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand f = make_integrand(cfg, kBelowThreshold);
  const int n = ladder(cfg, {64}).front();
  const Mesh mesh = Mesh::uniform(f.domain(), n);
  const VectorFunction g = datum(cfg, f, "sin(3*x1)*x2");
  const std::optional<DiscreteField> src = source(cfg, mesh);
  const std::vector<double> eps = cfg.epsilons.empty() ? default_schedule(f, mesh, g, 3, 8) : cfg.epsilons;
  const PathResult r = regularization_path(f, mesh, g, src, eps, solve_options(cfg));

  json j = envelope(ctx);
  j["integrand"] = spec_json(f.spec());
  j["resolution"] = n;
  j["path"] = r.report;
  write_json(ctx, j);

  std::ostringstream csv;
  csv << "epsilon,energy,el_residual,relative_residual,converged,dual_ratio,cauchy_defect\n";
  bool ok = !r.report.failed;
  const auto& entries = r.report.entries;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const SolveReport& s = entries[k].report;
    csv << csv_number(entries[k].epsilon) << ',' << csv_number(s.energy) << ',' << csv_number(s.el_residual) << ','
        << csv_number(s.relative_residual) << ',' << (s.converged ? 1 : 0) << ',' << csv_number(entries[k].dual_ratio)
        << ',' << (k > 0 ? csv_number(r.report.cauchy_defects[k - 1]) : "") << '\n';
    ok = ok && s.converged;
    // the regularized infima decrease with epsilon
    if (k > 0) ok = ok && s.energy <= entries[k - 1].report.energy + 1e-10 * (1.0 + std::abs(s.energy));
  }
  write_text(artifact(ctx, "csv"), csv.str());
  const double last_defect = r.report.cauchy_defects.empty() ? 0.0 : r.report.cauchy_defects.back();
  say(ctx, "path %s N=%d: %zu levels, limit energy=%.10g, final Cauchy defect=%.3e%s -> %s", f.name().c_str(), n,
      entries.size(), r.report.limit_energy, last_defect, ok ? "" : " (path invariant violated)",
      artifact(ctx, "json").c_str());
  if (r.report.failed) std::fprintf(stderr, "pqlab path: %s\n", r.report.failure.c_str());
  return ok ? kOk : kInvariantViolation;
}

Domain parse_domain(const std::string& text) {
  if (text == "unit-square") return Domain::of(Box::unit(2));
  if (text == "unit-interval") return Domain::of(Box::unit(1));
  if (text == "square-with-hole") return Domain::with_hole(Box::unit(2), Box::make(2, {0.375, 0.375}, {0.625, 0.625}));
  if (text.rfind("box:", 0) == 0) {
    std::vector<double> v;
    std::stringstream ss(text.substr(4));
    for (std::string item; std::getline(ss, item, ',');) v.push_back(to_double("domain", item));
    if (v.size() == 2) return Domain::of(Box::make(1, {v[0], 0.0}, {v[1], 0.0}));
    if (v.size() == 4) return Domain::of(Box::make(2, {v[0], v[2]}, {v[1], v[3]}));
  }
  throw UsageError("unknown domain '" + text + "'");
}

int cmd_cover(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Domain domain = parse_domain(opt(cfg, "domain", std::string("unit-square")));
  WhitneyOptions wo;
  wo.depth = opt_int(cfg, "depth", 8);
  const std::string rule = opt(cfg, "rule", std::string("separated"));
  if (rule != "separated" && rule != "classical") throw UsageError("rule must be separated or classical");
  wo.rule = rule == "classical" ? WhitneyRule::kClassical : WhitneyRule::kSeparated;
  const double m = opt(cfg, "m", 1.0);
  const WBCover cover = wb_enlarge(domain, whitney(domain, wo), m, false);
  const CoverAudit& a = cover.audit;

  json j = envelope(ctx);
  j["audit"] = a;
  bool ok = a.passed();
  std::optional<PouAudit> pa;
  double grad_c = 0.0;
  if (opt_flag(cfg, "audit")) {
    const PartitionOfUnity pou(cover);
    pa = audit_partition(pou, opt_int(cfg, "samples", 10000), cfg.seed);
    grad_c = gradient_constant(pou);
    j["partition"] = *pa;
    j["gradient_constant"] = number(grad_c);
    ok = ok && pa->max_sum_error <= 1e-9 && pa->lower_bound_violations == 0;
  }
  write_json(ctx, j);
  std::ostringstream csv;
  write_csv(cover, csv);
  write_text(artifact(ctx, "csv"), csv.str());

  say(ctx, "%-22s %12s   %s", "constant", "value", "bound");
  say(ctx, "%-22s %12d   <= %d", "multiplicity M", a.multiplicity, a.multiplicity_bound);
  say(ctx, "%-22s %12.6g   >= %.6g", "overlap ratio", a.min_overlap_ratio, a.overlap_bound);
  say(ctx, "%-22s %12.6g   >= 1 (%d violations)", "distance ratio", a.min_distance_ratio, a.distance_violations);
  if (pa) {
    say(ctx, "%-22s %12.3e   <= 1e-09", "PoU sum error", pa->max_sum_error);
    say(ctx, "%-22s %12.6g   >= 1", "PoU min psi*M", pa->min_scaled_weight);
    say(ctx, "%-22s %12.6g", "PoU gradient constant", grad_c);
  }
  say(ctx, "cover depth=%d m=%g: %d cubes (%d truncated), audit %s -> %s", wo.depth, m, a.cube_count, a.truncated_count,
      ok ? "passed" : ("FAILED " + a.first_failure).c_str(), artifact(ctx, "json").c_str());
  return ok ? kOk : kInvariantViolation;
}

int cmd_mollify(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand f = make_integrand(cfg, kBelowThreshold);
  const int n = ladder(cfg, {128}).front();
  const Mesh mesh = Mesh::uniform(f.domain(), n);
  const DiscreteField u =
      interpolate(mesh, VectorFunction::parse(opt(cfg, "field", std::string("sqrt(sqrt((x1 - 0.43)^2 + (x2 - 0.57)^2))"))));
  const double m = opt(cfg, "m", m_threshold(f.params()) + 0.5);
  WhitneyOptions wo;
  wo.depth = opt_int(cfg, "depth", 6);
  const Domain domain = Domain::of(f.domain());
  const PartitionOfUnity pou(wb_enlarge(domain, whitney(domain, wo), m, false));
  const std::vector<double> eps = cfg.epsilons.empty() ? std::vector<double>{16, 8, 4, 2, 1} : cfg.epsilons;
  const double exponent = opt(cfg, "exponent", f.params().p);
  const std::vector<MollifyStudyRow> rows = mollify_study(f, u, pou, m, eps, exponent);
  const SequenceReport seq = sequence_criterion(f, u, pou, eps, m);

  json j = envelope(ctx);
  j["integrand"] = spec_json(f.spec());
  j["m"] = number(m);
  j["rows"] = rows;
  j["sequence"] = seq;
  write_json(ctx, j);

  std::ostringstream csv;
  csv << "epsilon,distance,energy,relative_energy_error,boundary_deviation\n";
  bool monotone = true;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    csv << csv_number(rows[k].epsilon) << ',' << csv_number(rows[k].distance) << ',' << csv_number(rows[k].energy)
        << ',' << csv_number(std::abs(rows[k].energy - seq.reference_energy) / seq.reference_energy) << ','
        << csv_number(rows[k].boundary_deviation) << '\n';
    if (k > 0) monotone = monotone && rows[k].boundary_deviation <= rows[k - 1].boundary_deviation * (1 + 1e-9) + 1e-14;
  }
  write_text(artifact(ctx, "csv"), csv.str());
  say(ctx, "mollify %s N=%d m=%g: %zu epsilons, final distance=%.3e, energy error=%.3e%s -> %s", f.name().c_str(), n, m,
      rows.size(), rows.empty() ? 0.0 : rows.back().distance, seq.final_relative_error,
      monotone ? "" : " (boundary deviation not monotone)", artifact(ctx, "json").c_str());
  return monotone ? kOk : kInvariantViolation;
}

int cmd_besov(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand f = make_integrand(cfg, kBelowThreshold);
  const GrowthParams& gp = f.params();
  const double s = opt(cfg, "s", gp.alpha / std::max(2.0, gp.p));
  const double p = opt(cfg, "integrability", gp.p);
  const int h_samples = opt_int(cfg, "h_samples", 8);
  ConeSpec cone;
  cone.height = opt(cfg, "height", cone.height);
  std::optional<Ball> ball;
  if (find(cfg, "ball")) {
    const std::vector<double> b = opt_list(cfg, "ball");
    if (b.size() != 3) throw UsageError("ball needs cx cy r");
    ball = Ball{{b[0], b[1]}, b[2]};
  }
  const std::string* field = find(cfg, "field");
  const VectorFunction g = datum(cfg, f, "sin(3*x1)*x2");

  json levels = json::array();
  std::ostringstream csv;
  csv << "resolution,seminorm,ratio\n";
  std::vector<double> values;
  bool finite = true;
  for (int n : ladder(cfg, {32, 64, 128})) {
    const Mesh mesh = Mesh::uniform(f.domain(), n);
    json level{{"resolution", n}};
    BesovReport r;
    if (field) {
      r = dq_seminorm(interpolate(mesh, VectorFunction::parse(*field)), s, p, cone, h_samples, ball);
    } else {
      const SolveResult sr = minimize(f, mesh, g, std::nullopt, 0.0, solve_options(cfg));
      level["solve"] = sr.report;
      r = dq_seminorm(gradient(sr.u), s, p, cone, h_samples, ball);
    }
    level["besov"] = r;
    levels.push_back(level);
    const double ratio = values.empty() ? NAN : r.seminorm / values.back();
    csv << n << ',' << csv_number(r.seminorm) << ',' << (values.empty() ? "" : csv_number(ratio)) << '\n';
    values.push_back(r.seminorm);
    finite = finite && std::isfinite(r.seminorm);
  }
  json j = envelope(ctx);
  j["integrand"] = spec_json(f.spec());
  j["s"] = number(s);
  j["p"] = number(p);
  j["levels"] = levels;
  write_json(ctx, j);
  write_text(artifact(ctx, "csv"), csv.str());
  std::string seq;
  for (double v : values) seq += (seq.empty() ? "" : " ") + format_double(std::round(v * 1e4) / 1e4);
  say(ctx, "besov %s s=%g p=%g: seminorms %s (last ratio %.3f) -> %s", field ? "field" : f.name().c_str(), s, p,
      seq.c_str(), values.size() > 1 ? values.back() / values[values.size() - 2] : 1.0, artifact(ctx, "json").c_str());
  return finite ? kOk : kInvariantViolation;
}

int cmd_gap(const Context& ctx) {
  const ExperimentConfig& cfg = ctx.cfg;
  const Integrand base = make_integrand(cfg, kBelowThreshold);
  std::vector<double> qs = opt_list(cfg, "q_list");
  if (qs.empty()) qs.push_back(base.params().q);
  const std::vector<int> levels = ladder(cfg, {32, 64, 128});
  const VectorFunction g = datum(cfg, base, "sin(3*x1)*x2");
  GapOptions go;
  go.solve = solve_options(cfg);

  std::vector<SweepRow> rows;
  json sweep = json::array();
  bool module_error = false;
  std::string line;
  for (double q : qs) {
    const Integrand f = with_q(cfg, base, q);
    const GapReport r = estimate_gap(f, levels, g, std::nullopt, go);
    rows.push_back({q, r});
    sweep.push_back({{"q", number(q)}, {"integrand", spec_json(f.spec())}, {"report", r}});
    module_error = module_error || (r.verdict == GapVerdict::kInconclusive && !r.diagnostics.empty() &&
                                    r.levels.size() < levels.size());
    char buf[128];
    std::snprintf(buf, sizeof buf, "%sq=%g %s (gap %.3e)", line.empty() ? "" : ", ", q, to_string(r.verdict).c_str(),
                  r.gap);
    line += buf;
    // rewrite after every q so an interrupted sweep keeps its finished rows
    json j = envelope(ctx);
    j["sweep"] = sweep;
    write_json(ctx, j);
    std::ostringstream csv;
    write_sweep_csv(rows, csv);
    write_text(artifact(ctx, "csv"), csv.str());
  }
  say(ctx, "gap %s: %s -> %s", is_checkerboard(cfg) ? "checkerboard" : base.name().c_str(), line.c_str(),
      artifact(ctx, "json").c_str());
  return module_error ? kModuleError : kOk;
}

int cmd_examples(const Context& ctx) {
  json list = json::array();
  say(ctx, "%-14s %-18s %5s %5s %6s  %s", "name", "flavor", "p", "q", "alpha", "declared");
  for (const std::string& name : library_names()) {
    const Integrand f = example_library(name);
    json declared = json::array();
    std::string d;
    for (HypothesisId id : f.traits().declared) {
      declared.push_back(to_string(id));
      d += (d.empty() ? "" : " ") + to_string(id);
    }
    list.push_back({{"name", name}, {"flavor", to_string(f.flavor())}, {"params", f.params()}, {"declared", declared}});
    say(ctx, "%-14s %-18s %5g %5g %6g  %s", name.c_str(), to_string(f.flavor()).c_str(), f.params().p, f.params().q,
        f.params().alpha, d.c_str());
  }
  json j = envelope(ctx);
  j["examples"] = list;
  write_json(ctx, j);
  say(ctx, "examples: %zu built-in densities -> %s", list.size(), artifact(ctx, "json").c_str());
  return kOk;
}

}  // namespace

int run_command(const Context& ctx) {
  static const std::map<std::string, int (*)(const Context&)> table{
      {"check", cmd_check}, {"solve", cmd_solve}, {"path", cmd_path},   {"cover", cmd_cover},
      {"mollify", cmd_mollify}, {"besov", cmd_besov}, {"gap", cmd_gap}, {"examples", cmd_examples}};
  auto it = table.find(ctx.cfg.command);
  if (it == table.end()) throw UsageError("unknown command '" + ctx.cfg.command + "'");
  write_config(ctx);
  return it->second(ctx);
}

}  // namespace pqlab::cli
