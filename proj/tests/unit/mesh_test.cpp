#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pqlab/errors.hpp"
#include "pqlab/mesh.hpp"

namespace pqlab {
namespace {

Integrand quadratic(int n = 2) { return example_library("p-power", {{"n", std::to_string(n)}, {"p", "2"}}); }

TEST(Mesh, CountsAndBoundary) {
  const Mesh m = Mesh::uniform(Box::unit(2), 4);
  EXPECT_EQ(m.node_count(), 25);
  EXPECT_EQ(m.element_count(), 32);
  int boundary = 0;
  for (int k = 0; k < m.node_count(); ++k) boundary += m.is_boundary(k);
  EXPECT_EQ(boundary, 16);
  EXPECT_DOUBLE_EQ(m.node(24)[0], 1.0);
  EXPECT_DOUBLE_EQ(m.node(24)[1], 1.0);
}

TEST(Mesh, ElementVolumesTileTheBox) {
  const Mesh m(Box::make(2, {0.0, -1.0}, {2.0, 1.0}), {6, 3});
  EXPECT_NEAR(m.element_volume() * m.element_count(), 4.0, 1e-14);
  double w = 0.0;
  for (int k = 0; k < m.node_count(); ++k) w += m.nodal_weight(k);
  EXPECT_NEAR(w, 4.0, 1e-14);
}

TEST(Mesh, LocateReproducesCoordinates) {
  const Mesh m = Mesh::uniform(Box::unit(2), 7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point x{u(rng), u(rng)};
    std::array<double, 3> w{};
    const int e = m.locate(x, w);
    const auto nodes = m.element_nodes(e);
    double sx = 0.0, sy = 0.0, sw = 0.0;
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(w[k], -1e-12);
      sx += w[k] * m.node(nodes[k])[0];
      sy += w[k] * m.node(nodes[k])[1];
      sw += w[k];
    }
    EXPECT_NEAR(sw, 1.0, 1e-12);
    EXPECT_NEAR(sx, x[0], 1e-12);
    EXPECT_NEAR(sy, x[1], 1e-12);
  }
}

TEST(Gradient, AffineIsReproduced) {
  const Mesh m = Mesh::uniform(Box::unit(2), 5);
  const DiscreteField u = interpolate(m, VectorFunction::parse("2*x1 - 3*x2 + 1"));
  for (const Mat& z : gradient(u).values) {
    EXPECT_NEAR(z(0, 0), 2.0, 1e-12);
    EXPECT_NEAR(z(1, 0), -3.0, 1e-12);
  }
}

TEST(Gradient, ConstantGivesZero) {
  const DiscreteField u = interpolate(Mesh::uniform(Box::unit(2), 3), VectorFunction::parse("4"));
  for (const Mat& z : gradient(u).values) EXPECT_EQ(z.norm(), 0.0);
}

TEST(Gradient, QuadraticSlopesInOneDimension) {
  const DiscreteField u = interpolate(Mesh::uniform(Box::unit(1), 4), VectorFunction::parse("x1^2"));
  const ElementField du = gradient(u);
  // secant slope of x^2 on [a, a + 1/4] is 2 (a + 1/8)
  for (int e = 0; e < 4; ++e) EXPECT_NEAR(du.values[e](0, 0), 2.0 * (0.25 * e + 0.125), 1e-14);
}

TEST(Energy, ConstantGradientCases) {
  const Mesh m = Mesh::uniform(Box::unit(2), 8);
  EXPECT_NEAR(energy(quadratic(), interpolate(m, VectorFunction::parse("x1"))), 1.0, 1e-14);
  EXPECT_EQ(energy(quadratic(), DiscreteField(m, 1)), 0.0);
  const Integrand dp = example_library("double-phase", {{"p", "2"}, {"q", "3"}, {"a", "1"}});
  EXPECT_NEAR(energy(dp, interpolate(m, VectorFunction::parse("x1"))), 2.0, 1e-13);
}

TEST(Energy, SourceTermIsSubtracted) {
  const Mesh m = Mesh::uniform(Box::unit(2), 8);
  const DiscreteField u = interpolate(m, VectorFunction::parse("1"));
  const DiscreteField f = interpolate(m, VectorFunction::parse("3"));
  EXPECT_NEAR(energy(quadratic(), u, f), -3.0, 1e-13);
}

TEST(Energy, MeshMismatchThrows) {
  const DiscreteField u(Mesh::uniform(Box::unit(2), 4), 1);
  const DiscreteField f(Mesh::uniform(Box::unit(2), 5), 1);
  EXPECT_THROW(energy(quadratic(), u, f), InvalidArgument);
}

TEST(Norms, ConstantAndAffine) {
  const Mesh m = Mesh::uniform(Box::unit(2), 8);
  const DiscreteField c = interpolate(m, VectorFunction::parse("-2.5"));
  for (double e : {1.0, 2.0, 3.7}) EXPECT_NEAR(lp_norm(c, e), 2.5, 1e-13);
  EXPECT_NEAR(lp_norm(c, INFINITY), 2.5, 0.0);
  EXPECT_NEAR(lp_norm(gradient(interpolate(m, VectorFunction::parse("x1"))), 2.0), 1.0, 1e-14);
  EXPECT_THROW(lp_norm(c, 0.5), InvalidArgument);
}

TEST(Norms, SineAgainstAnalyticIntegral) {
  const DiscreteField u = interpolate(Mesh::uniform(Box::unit(1), 256), VectorFunction::parse("sin(pi*x1)"));
  EXPECT_NEAR(lp_norm(u, 2.0), 1.0 / std::sqrt(2.0), 1e-3);
}

TEST(Boundary, ZeroDatumAndCorner) {
  const Mesh m = Mesh::uniform(Box::unit(2), 6);
  DiscreteField u = interpolate(m, VectorFunction::parse("1 + x1*x2"));
  const DiscreteField z = apply_boundary(u, VectorFunction::zero(1));
  for (int k = 0; k < m.node_count(); ++k) {
    if (m.is_boundary(k)) EXPECT_EQ(z(k, 0), 0.0);
    else EXPECT_EQ(z(k, 0), u(k, 0));
  }
  const DiscreteField g = apply_boundary(u, VectorFunction::parse("x1"));
  EXPECT_EQ(g(m.node_index(6, 6), 0), 1.0);
}

TEST(Boundary, Idempotent) {
  const Mesh m = Mesh::uniform(Box::unit(2), 9);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double a = d(rng), b = d(rng);
  DiscreteField u(m, 1);
  for (double& v : u.values()) v = d(rng);
  const VectorFunction g(1, [=](const Point& x, double* o) { o[0] = std::sin(a * x[0]) + b * x[1]; });
  const DiscreteField once = apply_boundary(u, g);
  EXPECT_EQ(apply_boundary(once, g).values(), once.values());
}

TEST(Boundary, NonFiniteDatumThrows) {
  const Mesh m = Mesh::uniform(Box::unit(2), 4);
  EXPECT_THROW(apply_boundary(DiscreteField(m, 1), VectorFunction::parse("log(x1)")), InvalidArgument);
}

TEST(Prolong, ExactOnPiecewiseLinearNesting) {
  const DiscreteField coarse = interpolate(Mesh::uniform(Box::unit(2), 4), VectorFunction::parse("x1*x2"));
  const Mesh fine = Mesh::uniform(Box::unit(2), 8);
  const DiscreteField p = prolong(coarse, fine);
  for (int k = 0; k < fine.node_count(); ++k) EXPECT_NEAR(p(k, 0), coarse.interpolate(fine.node(k), 0), 1e-14);
  EXPECT_NEAR(energy(quadratic(), p), energy(quadratic(), coarse), 1e-13);
}

TEST(Serialization, BinaryRoundTrip) {
  const Mesh m(Box::make(2, {0.0, 0.0}, {2.0, 1.0}), {6, 3});
  const DiscreteField u = interpolate(m, VectorFunction::parse("x1; sin(x2)"));
  std::stringstream ss;
  write_binary(u, ss);
  const DiscreteField v = read_binary(ss, m.box());
  EXPECT_TRUE(v.mesh() == m);
  EXPECT_EQ(v.values(), u.values());
}

TEST(Serialization, CsvHeader) {
  const DiscreteField u = interpolate(Mesh::uniform(Box::unit(1), 2), VectorFunction::parse("x1"));
  std::ostringstream os;
  write_csv(u, os);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "x1,u1");
}

}  // namespace
}  // namespace pqlab
