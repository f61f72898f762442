#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "pqlab/errors.hpp"

using namespace pqlab;
using namespace pqlab::cli;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const std::string& x : v) s += (s.empty() ? "" : " ") + x;
  return s;
}

// Flag values are collected during parsing and layered over the config file afterwards.
struct Overrides {
  std::string config_path;
  std::string out_dir = ".";
  bool quiet = false;
  std::map<std::string, std::string> experiment;  // command-independent ExperimentConfig fields
  std::map<std::string, std::string> integrand;
  std::map<std::string, std::string> options;
  std::map<std::string, std::string> outputs;
};

void scalar(CLI::App* app, const std::string& flag, std::map<std::string, std::string>& into, const std::string& key,
            const std::string& help) {
  app->add_option_function<std::string>(flag, [&into, key](const std::string& v) { into[key] = v; }, help);
}

void list(CLI::App* app, const std::string& flag, std::map<std::string, std::string>& into, const std::string& key,
          const std::string& help) {
  app->add_option_function<std::vector<std::string>>(
      flag, [&into, key](const std::vector<std::string>& v) { into[key] = join(v); }, help);
}

void add_common(CLI::App* app, Overrides& ov) {
  app->add_option("--config", ov.config_path, "Experiment config file; flags override its values");
  app->add_option("--out", ov.out_dir, "Directory for JSON/CSV artifacts")->capture_default_str();
  app->add_flag("--quiet", ov.quiet, "Suppress the summary line");
  scalar(app, "--tol", ov.experiment, "tol", "Relative Euler-Lagrange residual target");
  scalar(app, "--max-iter", ov.experiment, "max_iter", "Iteration cap per solve");
  list(app, "--eps-schedule", ov.experiment, "epsilons", "Epsilon ladder (regularization or mollification)");
  list(app, "--resolution", ov.experiment, "resolutions", "Mesh resolution(s), cells per unit side");
  scalar(app, "--seed", ov.experiment, "seed", "Seed for every random choice");
  scalar(app, "--threads", ov.experiment, "threads", "Worker cap (computations are sequential)");
  scalar(app, "--json", ov.outputs, "json", "JSON report file name");
  scalar(app, "--csv", ov.outputs, "csv", "CSV study file name");
}

void add_integrand(CLI::App* app, Overrides& ov) {
  app->add_option_function<std::string>(
      "--integrand", [&ov](const std::string& v) { ov.experiment["integrand"] = v; },
      "Built-in density (see `examples`) or `checkerboard`");
  for (const char* k : {"p", "q", "alpha", "a", "box"}) {
    scalar(app, std::string("--") + k, ov.integrand, k, std::string("Integrand parameter ") + k);
  }
  app->add_option_function<std::vector<std::string>>(
      "--param",
      [&ov](const std::vector<std::string>& v) {
        for (const std::string& kv : v) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected key=value, got " + kv);
          ov.integrand[kv.substr(0, eq)] = kv.substr(eq + 1);
        }
      },
      "Further integrand parameters as key=value");
}

void apply(const Overrides& ov, ExperimentConfig& cfg) {
  for (const auto& [k, v] : ov.experiment) {
    if (k == "integrand") {
      if (cfg.integrand.name != v) cfg.integrand.params.clear();
      cfg.integrand.name = v;
      continue;
    }
    // reuse the config parser so flags and files accept the same syntax
    const std::string section = k == "epsilons" ? "schedule" : k == "resolutions" ? "mesh"
                                : (k == "tol" || k == "max_iter")               ? "tolerances"
                                                                                 : "experiment";
    const ExperimentConfig one =
        ExperimentConfig::parse("[experiment]\ncommand = run\n[" + section + "]\n" + k + " = " + v + "\n");
    if (k == "epsilons") cfg.epsilons = one.epsilons;
    if (k == "resolutions") cfg.resolutions = one.resolutions;
    if (k == "tol") cfg.tol = one.tol;
    if (k == "max_iter") cfg.max_iter = one.max_iter;
    if (k == "seed") cfg.seed = one.seed;
    if (k == "threads") cfg.threads = one.threads;
  }
  for (const auto& [k, v] : ov.integrand) cfg.integrand.params[k] = v;
  for (const auto& [k, v] : ov.options) cfg.options[k] = v;
  for (const auto& [k, v] : ov.outputs) cfg.outputs[k] = v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pqlab: experiments on (p,q)-growth functionals"};
  app.require_subcommand(1);
  Overrides ov;

  auto* check = app.add_subcommand("check", "Audit growth and ellipticity hypotheses on seeded samples");
  add_common(check, ov);
  add_integrand(check, ov);
  list(check, "--hyp", ov.options, "hyp", "Hypotheses (H1 H1.1 H1.2 H1.3 H2 H3 H4 ...); default: declared set");
  scalar(check, "--samples", ov.options, "samples", "Samples per hypothesis");
  scalar(check, "--zmin", ov.options, "zmin", "Smallest sampled |z|");
  scalar(check, "--zmax", ov.options, "zmax", "Largest sampled |z|");

  auto* solve = app.add_subcommand("solve", "Minimize the discrete energy with Dirichlet data");
  add_common(solve, ov);
  add_integrand(solve, ov);
  scalar(solve, "--g", ov.options, "g", "Boundary datum expression (components separated by ';')");
  scalar(solve, "--f", ov.options, "f", "Source term expression");
  scalar(solve, "--epsilon", ov.options, "epsilon", "Regularization eps |z|^q");
  solve->add_flag_function(
      "--random-start", [&ov](std::int64_t) { ov.options["random_start"] = "1"; },
      "Perturb the cold start with seeded noise");
  solve->add_flag_function(
      "--dump", [&ov](std::int64_t) { ov.options["dump"] = "1"; }, "Also write the nodal field (CSV and binary)");

  auto* path = app.add_subcommand("path", "Warm-started solves along a decreasing regularization ladder");
  add_common(path, ov);
  add_integrand(path, ov);
  scalar(path, "--g", ov.options, "g", "Boundary datum expression");
  scalar(path, "--f", ov.options, "f", "Source term expression");

  auto* cover = app.add_subcommand("cover", "Build and audit a Whitney-Besicovitch cover");
  add_common(cover, ov);
  scalar(cover, "--domain", ov.options, "domain",
         "unit-square, unit-interval, square-with-hole or box:lo1,hi1[,lo2,hi2]");
  scalar(cover, "--depth", ov.options, "depth", "Whitney truncation depth");
  scalar(cover, "--m", ov.options, "m", "Scale exponent m >= 1");
  scalar(cover, "--rule", ov.options, "rule", "separated or classical");
  cover->add_flag_function(
      "--audit", [&ov](std::int64_t) { ov.options["audit"] = "1"; }, "Also audit the partition of unity");
  scalar(cover, "--samples", ov.options, "samples", "Partition-of-unity audit samples");

  auto* mollify = app.add_subcommand("mollify", "Convergence study of the cover-adapted mollification");
  add_common(mollify, ov);
  add_integrand(mollify, ov);
  scalar(mollify, "--field", ov.options, "field", "Field to approximate");
  scalar(mollify, "--depth", ov.options, "depth", "Whitney depth of the cover");
  scalar(mollify, "--m", ov.options, "m", "Scale exponent; default threshold + 0.5");
  scalar(mollify, "--exponent", ov.options, "exponent", "Sobolev exponent of the distance; default p");

  auto* besov = app.add_subcommand("besov", "Difference-quotient seminorm study across resolutions");
  add_common(besov, ov);
  add_integrand(besov, ov);
  scalar(besov, "--field", ov.options, "field", "Field to measure; default: gradient of the minimizer");
  scalar(besov, "--g", ov.options, "g", "Boundary datum when solving");
  scalar(besov, "--s", ov.options, "s", "Smoothness in (0, 1); default alpha / max(2, p)");
  scalar(besov, "--integrability", ov.options, "integrability", "Integrability exponent; default p");
  scalar(besov, "--h-samples", ov.options, "h_samples", "Dyadic shift lengths per direction");
  scalar(besov, "--height", ov.options, "height", "Longest shift");
  list(besov, "--ball", ov.options, "ball", "Restrict to a ball: cx cy r");

  auto* gap = app.add_subcommand("gap", "Two-class infimum sweep (full vs conforming-smooth)");
  add_common(gap, ov);
  add_integrand(gap, ov);
  scalar(gap, "--g", ov.options, "g", "Boundary datum expression");
  list(gap, "--q-list", ov.options, "q_list", "Sweep over these q values");

  auto* examples = app.add_subcommand("examples", "List the built-in densities");
  add_common(examples, ov);

  auto* run = app.add_subcommand("run", "Execute the command named in --config");
  add_common(run, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  Context ctx;
  try {
    if (!ov.config_path.empty()) ctx.cfg = ExperimentConfig::load(ov.config_path);
    CLI::App* sub = app.get_subcommands().front();
    if (sub->get_name() != "run") {
      ctx.cfg.command = sub->get_name();
    } else if (ov.config_path.empty()) {
      throw UsageError("run needs --config");
    }
    apply(ov, ctx.cfg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pqlab: %s\n", e.what());
    return kUsage;
  }
  ctx.out_dir = ov.out_dir;
  ctx.quiet = ov.quiet;

  try {
    return run_command(ctx);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "pqlab %s: %s\n", ctx.cfg.command.c_str(), e.what());
    return kUsage;
  } catch (const InternalError& e) {
    std::fprintf(stderr, "pqlab %s: invariant violated: %s\n", ctx.cfg.command.c_str(), e.what());
    return kInvariantViolation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pqlab %s: %s\n", ctx.cfg.command.c_str(), e.what());
    return kModuleError;
  }
}
