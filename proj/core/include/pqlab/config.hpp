#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pqlab/integrand.hpp"

namespace pqlab {

/// Experiment description in a flat sectioned key-value format:
///
///   [experiment]
///   command = solve
///   seed = 1
///   threads = 1
///   [integrand]
///   name = double-phase
///   q = 2.5
///   [mesh]
///   resolutions = 64 128
///   [schedule]
///   epsilons = 0.125 0.0625
///   [tolerances]
///   tol = 1e-06
///   max_iter = 10000
///   [outputs]
///   json = report.json
///   [options]
///   g = x1
///
/// Blank lines and lines starting with '#' are ignored. The integrand box is the
/// `box` key of the integrand section ("lo1,hi1[,lo2,hi2]").
struct ExperimentConfig {
  std::string command;
  IntegrandSpec integrand;
  std::vector<int> resolutions;
  std::vector<double> epsilons;
  unsigned long long seed = 1;
  int threads = 1;
  double tol = 1e-6;
  int max_iter = 10000;
  std::map<std::string, std::string> outputs;
  std::map<std::string, std::string> options;

  std::string serialize() const;
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);
  bool operator==(const ExperimentConfig&) const = default;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace pqlab
