#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "pqlab/config.hpp"
#include "pqlab/errors.hpp"

namespace pqlab {
namespace {

TEST(Config, ParsesDocumentedLayout) {
  const ExperimentConfig c = ExperimentConfig::parse(R"(# comment
[experiment]
command = solve
seed = 7
threads = 2

[integrand]
name = double-phase
q = 2.5
a = max(0, x1 - x2)^1

[mesh]
resolutions = 64 128
[schedule]
epsilons = 0.125 0.0625
[tolerances]
tol = 1e-08
max_iter = 500
[outputs]
json = report.json
[options]
g = x1
)");
  EXPECT_EQ(c.command, "solve");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.threads, 2);
  EXPECT_EQ(c.integrand.name, "double-phase");
  EXPECT_EQ(c.integrand.params.at("a"), "max(0, x1 - x2)^1");
  EXPECT_EQ(c.resolutions, (std::vector<int>{64, 128}));
  EXPECT_EQ(c.epsilons, (std::vector<double>{0.125, 0.0625}));
  EXPECT_EQ(c.tol, 1e-8);
  EXPECT_EQ(c.max_iter, 500);
  EXPECT_EQ(c.outputs.at("json"), "report.json");
  EXPECT_EQ(c.options.at("g"), "x1");
}

TEST(Config, RoundTripPreservesEveryField) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> d(1e-9, 1.0);
  for (int t = 0; t < 50; ++t) {
    ExperimentConfig c;
    c.command = "gap";
    c.integrand = {"p-power", {{"p", format_double(1.0 + d(rng))}}};
    c.resolutions = {16, 32 + t};
    c.epsilons = {d(rng), d(rng) / 3.0};
    c.seed = rng();
    c.threads = 1 + t % 4;
    c.tol = d(rng);
    c.max_iter = t * 7;
    c.outputs = {{"csv", "out.csv"}};
    c.options = {{"q-list", "3.2 3.5"}};
    EXPECT_EQ(ExperimentConfig::parse(c.serialize()), c);
  }
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(ExperimentConfig::parse("[experiment]\nbogus = 1\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("[nowhere]\nx = 1\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("[experiment]\nthreads = 0\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("[mesh]\nresolutions = 8 x\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::parse("[experiment]\ncommand solve\n"), InvalidArgument);
  EXPECT_THROW(ExperimentConfig::load("/nonexistent/pqlab.cfg"), InvalidArgument);
}

TEST(Config, LoadFromFile) {
  const std::string path = ::testing::TempDir() + "pqlab_config_test.cfg";
  {
    std::ofstream os(path);
    os << "[experiment]\ncommand = cover\n[options]\ndepth = 6\n";
  }
  const ExperimentConfig c = ExperimentConfig::load(path);
  EXPECT_EQ(c.command, "cover");
  EXPECT_EQ(c.options.at("depth"), "6");
  std::remove(path.c_str());
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(format_double(1e-6), "1e-06");
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = d(rng);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
}  // namespace pqlab
