#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pqlab/errors.hpp"
#include "pqlab/hypothesis.hpp"
#include "pqlab/integrand.hpp"

namespace pqlab {
namespace {

SampleSpec samples(int count, unsigned long long seed = 1) {
  SampleSpec s;
  s.count = count;
  s.seed = seed;
  return s;
}

TEST(Hypothesis, QuadraticEllipticity) {
  const Integrand f = example_library("p-power", {{"p", "2"}});
  const HypothesisReport r = check_hypothesis(f, HypothesisId::kH1, samples(4000));
  EXPECT_TRUE(r.passed());
  EXPECT_GE(r.fitted.at("nu"), 1.0 - 1e-9);
}

TEST(Hypothesis, HolderContinuityOfDoublePhase) {
  const Integrand f = example_library("double-phase", {{"p", "2"}, {"q", "3"}, {"a", "abs(x1)^1"}});
  const HypothesisReport r = check_hypothesis(f, HypothesisId::kH3, samples(4000));
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.fitted.at("Lambda"), 1.0);

  // brute force over a grid: |a(x) - a(y)| |z|^3 / (|x - y| (1 + |z|^2)^(3/2)) for |z| on a log grid
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      if (i == j) continue;
      const double x = i / 20.0, y = j / 20.0;
      for (int k = -10; k <= 10; ++k) {
        const double r = std::pow(10.0, k / 5.0);
        const double ratio = std::abs(x - y) * r * r * r / (std::abs(x - y) * std::pow(1.0 + r * r, 1.5));
        worst = std::max(worst, ratio);
      }
    }
  }
  EXPECT_LE(worst, 1.0);
  EXPECT_LE(r.fitted.at("Lambda"), worst + 1e-12);
}

TEST(Hypothesis, ExchangeWitnessIsLeftEndpoint) {
  const Integrand f = example_library("F1", {{"n", "1"}, {"p", "2"}, {"q", "2"}, {"a", "1 + x1"}});
  const HypothesisReport r = check_hypothesis(f, HypothesisId::kH4, samples(640));
  EXPECT_TRUE(r.passed());
  ASSERT_FALSE(r.witnesses.empty());
  const Box& box = f.domain();
  for (const ExchangeWitness& w : r.witnesses) {
    // exhaustive minimization of a over the ball
    double best_y = w.center[0], best_a = INFINITY;
    for (int i = 0; i <= 4000; ++i) {
      const double y = std::clamp(w.center[0] - w.radius + 2.0 * w.radius * i / 4000.0, box.lo[0], box.hi[0]);
      if (1.0 + y < best_a) {
        best_a = 1.0 + y;
        best_y = y;
      }
    }
    EXPECT_NEAR(w.y_hat[0], best_y, 1e-12);
    EXPECT_NEAR(w.y_hat[0], std::max(box.lo[0], w.center[0] - w.radius), 1e-12);
  }
}

TEST(Hypothesis, VariableExponentDipPasses) {
  const Integrand f = example_library("px-laplacian", {{"px", "2 - 0.3*max(0, 0.5 - x1)"}, {"p", "1.85"}, {"q", "2"}});
  EXPECT_EQ(f.flavor(), Flavor::kVariableExponent);
  EXPECT_TRUE(check_hypothesis(f, HypothesisId::kH1_1, samples(3000)).passed());
}

TEST(Hypothesis, MisdeclaredExponentIsCaught) {
  const Integrand good = example_library("double-phase", {{"p", "2"}, {"q", "3"}, {"a", "x1"}});
  GrowthParams wrong = good.params();
  wrong.p = wrong.q;
  const HypothesisReport r = check_hypothesis(good.with_params(wrong), HypothesisId::kH1, samples(2000));
  EXPECT_FALSE(r.passed());
}

TEST(Hypothesis, UnknownIdentifierRejected) {
  EXPECT_THROW(parse_hypothesis("H9"), InvalidArgument);
  EXPECT_EQ(parse_hypothesis("H1.1"), HypothesisId::kH1_1);
  EXPECT_EQ(parse_hypothesis("H4"), HypothesisId::kH4);
}

TEST(Hypothesis, SeedDeterminesReport) {
  const Integrand f = example_library("double-phase");
  const HypothesisReport a = check_hypothesis(f, HypothesisId::kH2, samples(500, 9));
  const HypothesisReport b = check_hypothesis(f, HypothesisId::kH2, samples(500, 9));
  EXPECT_EQ(a.fitted, b.fitted);
}

TEST(Hypothesis, ConvexityAndGradientConsistency) {
  for (const std::string& name : library_names()) {
    const Integrand f = example_library(name);
    EXPECT_LE(convexity_defect(f, samples(2000)), 1e-10) << name;
    EXPECT_LE(gradient_consistency(f, samples(500)), 1e-4) << name;
  }
}

}  // namespace
}  // namespace pqlab
