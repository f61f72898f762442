#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pqlab/covering.hpp"
#include "pqlab/errors.hpp"
#include "pqlab/mollify.hpp"

namespace pqlab {
namespace {

GrowthParams growth(double p, double q, int n = 2, double alpha = 1.0) {
  GrowthParams g;
  g.p = p;
  g.q = q;
  g.n = n;
  g.alpha = alpha;
  return g;
}

TEST(Kernel, UnitMass) {
  // midpoint rule on the radial integral
  for (double r : {0.05, 1.0, 3.0}) {
    const Kernel k1(1, r), k2(2, r);
    const int steps = 200000;
    double m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double t = (i + 0.5) * r / steps;
      m1 += 2.0 * k1(t) * r / steps;
      m2 += 2.0 * std::numbers::pi * t * k2(t) * r / steps;
    }
    EXPECT_NEAR(m1, 1.0, 1e-8) << r;
    EXPECT_NEAR(m2, 1.0, 1e-8) << r;
    EXPECT_EQ(k2(r), 0.0);
  }
  EXPECT_THROW(Kernel(2, 0.0), InvalidArgument);
}

TEST(Mollify, AffineAndConstantReproduced) {
  const Mesh m = Mesh::uniform(Box::unit(2), 32);
  for (const char* expr : {"3*x1 - x2 + 0.5", "-7"}) {
    const DiscreteField u = interpolate(m, VectorFunction::parse(expr));
    const InteriorField v = mollify(u, 0.15);
    int defined = 0;
    for (int k = 0; k < m.node_count(); ++k) {
      EXPECT_NEAR(v.field(k, 0), u(k, 0), 1e-12);
      defined += v.defined[k];
    }
    EXPECT_GT(defined, 0);
  }
}

TEST(Mollify, KinkValueMatchesConvolutionIntegral) {
  const double x0 = 0.5, eps = 0.1;
  const Mesh m = Mesh::uniform(Box::unit(1), 2048);
  const DiscreteField u = interpolate(m, VectorFunction(1, [&](const Point& x, double* o) { o[0] = std::abs(x[0] - x0); }));
  const InteriorField v = mollify(u, eps);
  const Kernel k(1, eps);
  const int steps = 100000;
  double expected = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double y = -eps + (i + 0.5) * 2.0 * eps / steps;
    expected += std::abs(y) * k(std::abs(y)) * 2.0 * eps / steps;
  }
  const int node = m.node_index(1024, 0);
  ASSERT_TRUE(v.defined[node]);
  EXPECT_NEAR(v.field(node, 0), expected, 1e-4 * expected);
  EXPECT_GT(v.field(node, 0), 0.0);
}

TEST(Mollify, RadiusBelowMeshScaleRejected) {
  const DiscreteField u(Mesh::uniform(Box::unit(2), 16), 1);
  EXPECT_THROW(mollify(u, 0.01), InvalidArgument);
}

TEST(Approximant, AffineReproducedExactly) {
  const Domain d = Domain::of(Box::unit(2));
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, {5}), 2.5));
  const Mesh m = Mesh::uniform(Box::unit(2), 64);
  const DiscreteField u = interpolate(m, VectorFunction::parse("2*x1 + 5*x2 - 1"));
  const GrowthParams g = growth(2.0, 2.2);
  const DiscreteField w = wb_approximant(u, pou, ApproximantConfig::make(g, 1.0, 2.5));
  for (int k = 0; k < m.node_count(); ++k) EXPECT_NEAR(w(k, 0), u(k, 0), 1e-11);
}

TEST(Exponents, ThetaAndThreshold) {
  EXPECT_NEAR(theta_exponent(growth(2.0, 2.2)), 2.0 / 2.2, 1e-15);
  EXPECT_NEAR(theta_exponent(growth(1.5, 2.0)), 1.0 + 2.0 * (0.5 - 1.0 / 1.5), 1e-15);
  const GrowthParams g = growth(2.0, 2.2);
  const double bracket = 2.0 / 2.2 - (2.0 * 1.2 / 2.0) * (1.0 - 2.0 / 2.2);
  EXPECT_NEAR(m_threshold(g), std::max(1.0, 1.0 / bracket), 1e-12);
  EXPECT_THROW(m_threshold(growth(1.2, 3.5)), OutOfRange);
  EXPECT_THROW(ApproximantConfig::make(g, 0.5, 1.0).validate(g), InvalidArgument);
}

TEST(H4, AutonomousConvexHasNoDefect) {
  const Integrand f = example_library("p-power", {{"p", "3"}, {"q", "3"}});
  const Mesh m = Mesh::uniform(Box::unit(2), 48);
  const DiscreteField u = interpolate(m, VectorFunction::parse("sin(4*x1)*cos(3*x2) + abs(x1 - 0.4)"));
  const H4Defect r = h4_commutation_defect(f, u, 0.1, 1.0);
  EXPECT_GT(r.evaluated, 0);
  EXPECT_EQ(r.defect_max, 0.0);
  EXPECT_LE(r.max_ratio, 1.0 + 1e-12);
}

TEST(StarScale, LinearAndConstant) {
  const Mesh m = Mesh::uniform(Box::unit(2), 16);
  const DiscreteField lin = interpolate(m, VectorFunction::parse("2*(x1 - 0.5) - (x2 - 0.5)"));
  const DiscreteField c = interpolate(m, VectorFunction::parse("3"));
  const DiscreteField ls = star_scale(lin, 0.7);
  const DiscreteField cs = star_scale(c, 0.7);
  for (int k = 0; k < m.node_count(); ++k) {
    EXPECT_NEAR(ls(k, 0), lin(k, 0), 1e-12);
    EXPECT_NEAR(cs(k, 0), 2.1, 1e-12);
  }
  EXPECT_THROW(star_scale(c, 0.5), InvalidArgument);
  EXPECT_THROW(star_scale(c, 1.0), InvalidArgument);
}

TEST(LogLog, ExactPowerLaw) {
  std::vector<double> x, y;
  for (double t : {0.1, 0.2, 0.4, 0.8}) {
    x.push_back(t);
    y.push_back(3.0 * std::pow(t, 1.7));
  }
  const SlopeFit fit = loglog_fit(x, y);
  EXPECT_NEAR(fit.slope, 1.7, 1e-12);
  EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
}

}  // namespace
}  // namespace pqlab
