#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pqlab/covering.hpp"
#include "pqlab/errors.hpp"
#include "pqlab/lavrentiev.hpp"

namespace pqlab {
namespace {

Mat row(double a, double b) {
  Mat z(2, 1);
  z(0, 0) = a;
  z(1, 0) = b;
  return z;
}

TEST(Gap, AutonomousPowerHasNoGap) {
  const Integrand f = example_library("p-power", {{"p", "3"}, {"q", "3"}});
  const GapReport r = estimate_gap(f, {8, 16, 32}, VectorFunction::parse("sin(2*x1) + x2^2"));
  EXPECT_EQ(r.verdict, GapVerdict::kNoGap) << r.diagnostics;
  ASSERT_EQ(r.levels.size(), 3u);
  for (const GapLevel& l : r.levels) {
    EXPECT_LE(std::abs(l.gap), l.tolerance);
    EXPECT_LE(l.inf_full, l.inf_smooth + l.tolerance);
  }
  EXPECT_NEAR(relaxed_energy_estimate(r), r.inf_full, 10.0 * r.levels.back().tolerance + 1e-3 * r.inf_full);
}

TEST(Gap, DiagonalDoublePhaseBelowThreshold) {
  const Integrand f = diagonal_double_phase(2.0, 2.5);
  const GapReport r = estimate_gap(f, {8, 16, 32}, VectorFunction::parse("sin(3*x1)*x2"));
  EXPECT_EQ(r.verdict, GapVerdict::kNoGap) << r.diagnostics;
  EXPECT_NEAR(relaxed_energy_estimate(r), r.inf_full, 0.02 * std::abs(r.inf_full));
}

TEST(Gap, LadderValidation) {
  const Integrand f = example_library("p-power");
  const VectorFunction g = VectorFunction::parse("x1");
  EXPECT_THROW(estimate_gap(f, {16}, g), InvalidArgument);
  EXPECT_THROW(estimate_gap(f, {16, 8}, g), InvalidArgument);
  GapOptions bad;
  bad.cap_factor = 0.5;
  EXPECT_THROW(estimate_gap(f, {8, 16}, g, std::nullopt, bad), InvalidArgument);
}

TEST(Gap, SolverFailureIsInconclusive) {
  const Integrand f = example_library("double-phase", {{"p", "2"}, {"q", "3"}, {"a", "x1"}});
  GapOptions o;
  o.solve.max_iter = 0;
  o.solve.random_seed = 1;
  const GapReport r = estimate_gap(f, {8, 16}, VectorFunction::parse("x1*x2"), std::nullopt, o);
  EXPECT_EQ(r.verdict, GapVerdict::kInconclusive);
  EXPECT_FALSE(r.diagnostics.empty());
}

TEST(Checkerboard, WeightAndDatum) {
  const Integrand f = checkerboard_integrand(1.7, 3.5);
  EXPECT_EQ(f.params().p, 1.7);
  EXPECT_EQ(f.params().q, 3.5);
  const Mat z = row(0.6, 0.8);
  // weight vanishes on the upper-right and lower-left quadrants
  EXPECT_NEAR(f.eval({0.8, 0.7}, z), 1.0, 1e-14);
  EXPECT_NEAR(f.eval({0.2, 0.1}, z), 1.0, 1e-14);
  EXPECT_NEAR(f.eval({0.8, 0.3}, z), 1.0 + 100.0 * 0.2, 1e-12);
  EXPECT_NEAR(f.eval({0.4, 0.9}, z), 1.0 + 100.0 * 0.1, 1e-12);
  EXPECT_THROW(checkerboard_integrand(1.7, 3.5, 1.0, 0.0), InvalidArgument);

  const VectorFunction g = checkerboard_datum();
  double v[1];
  auto at = [&](double x1, double x2) {
    g({x1, x2}, v);
    return v[0];
  };
  EXPECT_NEAR(at(0.9, 0.5), 0.0, 1e-15);
  EXPECT_NEAR(at(0.5 + 0.3, 0.5 + 0.3), 0.5, 1e-14);
  EXPECT_NEAR(at(0.1, 0.9), 1.0, 1e-15);
  EXPECT_NEAR(at(0.2, 0.2), 0.5, 1e-14);
  EXPECT_NEAR(at(0.9, 0.1), 0.0, 1e-15);
}

TEST(Sequence, SmoothFieldAutonomousConverges) {
  const Integrand f = example_library("p-power", {{"p", "2"}, {"q", "2"}});
  const DiscreteField u = interpolate(Mesh::uniform(Box::unit(2), 64), VectorFunction::parse("sin(2*x1)*cos(x2)"));
  const Domain d = Domain::of(Box::unit(2));
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, {5}), 1.0));
  const SequenceReport r = sequence_criterion(f, u, pou, {1.0, 0.5, 0.25});
  ASSERT_EQ(r.entries.size(), 3u);
  EXPECT_TRUE(r.converges);
  for (const SequenceEntry& e : r.entries) EXPECT_NEAR(e.energy, r.reference_energy, 0.02 * r.reference_energy);
  EXPECT_NEAR(r.reference_energy, energy(f, u), 1e-14);
}

TEST(Sweep, CsvLayout) {
  GapReport rep;
  rep.verdict = GapVerdict::kGap;
  GapLevel l;
  l.resolution = 16;
  l.inf_full = 1.0;
  l.inf_smooth = 1.5;
  l.gap = 0.5;
  rep.levels = {l};
  std::ostringstream os;
  write_sweep_csv({{3.5, rep}}, os);
  std::istringstream is(os.str());
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  EXPECT_EQ(header, "q,level,inf_full,inf_smooth,gap,verdict");
  EXPECT_EQ(line.substr(0, 7), "3.5,16,");
  EXPECT_NE(line.find(to_string(GapVerdict::kGap)), std::string::npos);
}

}  // namespace
}  // namespace pqlab
