#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "pqlab/covering.hpp"
#include "pqlab/errors.hpp"

namespace pqlab {
namespace {

// brute-force dyadic decomposition of (0,1): enumerate every interval of every level and keep
// those accepted by the distance rule whose ancestors were not accepted
std::set<std::pair<int, long>> dyadic_oracle(int depth, double c) {
  std::set<std::pair<int, long>> out;
  auto accepted = [&](int level, long k) {
    const double s = std::ldexp(1.0, -level);
    const double d = std::min(k * s, 1.0 - (k + 1) * s);
    return d > 0.0 && d >= c * s;
  };
  for (int level = 0; level <= depth; ++level) {
    for (long k = 0; k < (1L << level); ++k) {
      bool ancestor = false;
      for (int up = 1; up <= level && !ancestor; ++up) ancestor = accepted(level - up, k >> up);
      if (ancestor) continue;
      if (accepted(level, k) || level == depth) out.insert({level, k});
    }
  }
  return out;
}

TEST(Whitney, UnitIntervalMatchesBruteForce) {
  for (WhitneyRule rule : {WhitneyRule::kClassical, WhitneyRule::kSeparated}) {
    const double c = rule == WhitneyRule::kClassical ? 0.5 : 3.0;
    for (int depth : {4, 8, 12}) {
      const std::vector<DyadicCube> cubes = whitney(Domain::of(Box::unit(1)), {depth, rule});
      std::set<std::pair<int, long>> got;
      for (const DyadicCube& q : cubes) got.insert({q.level, std::lround(q.lo[0] * std::ldexp(1.0, q.level))});
      EXPECT_EQ(got, dyadic_oracle(depth, c)) << depth;
    }
  }
}

TEST(Whitney, TwoLargestIntervalsHaveLengthQuarter) {
  std::vector<DyadicCube> cubes = whitney(Domain::of(Box::unit(1)), {8, WhitneyRule::kClassical});
  std::sort(cubes.begin(), cubes.end(), [](const auto& a, const auto& b) { return a.side > b.side; });
  ASSERT_GE(cubes.size(), 3u);
  EXPECT_EQ(cubes[0].side, 0.25);
  EXPECT_EQ(cubes[1].side, 0.25);
  EXPECT_LT(cubes[2].side, 0.25);
  double total = 0.0;
  for (const DyadicCube& q : cubes) total += q.side;
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Whitney, WholeSpaceRejected) {
  EXPECT_THROW(whitney(Domain::everything(2)), InvalidArgument);
  EXPECT_THROW(whitney(Domain::of(Box::unit(2)), {15, WhitneyRule::kSeparated}), InvalidArgument);
}

TEST(Cover, UnitSquareConstants) {
  const Domain d = Domain::of(Box::unit(2));
  const WBCover cover = wb_enlarge(d, whitney(d, {8}), 1.0);
  EXPECT_TRUE(cover.audit.passed()) << cover.audit.first_failure;
  EXPECT_EQ(cover.audit.multiplicity_bound, 21);
  EXPECT_LE(cover.audit.multiplicity, 21);
  EXPECT_GE(cover.audit.min_overlap_ratio, 1.0 / 196.0);

  // independent multiplicity count from the enlarged squares themselves
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(1e-4, 1.0 - 1e-4);
  int worst = 0;
  for (int s = 0; s < 20000; ++s) {
    const Point x{u(rng), u(rng)};
    int count = 0;
    for (const WBCube& k : cover.cubes) {
      count += std::abs(x[0] - k.center[0]) <= 0.5 * k.side && std::abs(x[1] - k.center[1]) <= 0.5 * k.side;
    }
    worst = std::max(worst, count);
    std::vector<int> listed = cover.containing(x);
    EXPECT_EQ(static_cast<int>(listed.size()), count);
  }
  EXPECT_LE(worst, cover.audit.multiplicity);
}

TEST(Cover, IntervalDistancesExhaustive) {
  const Domain d = Domain::of(Box::unit(1));
  const WBCover cover = wb_enlarge(d, whitney(d, {8}), 1.0);
  EXPECT_TRUE(cover.audit.passed()) << cover.audit.first_failure;
  for (const WBCube& k : cover.cubes) {
    EXPECT_NEAR(k.side, 7.0 / 6.0 * k.base.side, 1e-15);
    const double dist = std::max(0.0, std::min(k.center[0] - 0.5 * k.side, 1.0 - k.center[0] - 0.5 * k.side));
    EXPECT_NEAR(k.distance, dist, 1e-14);
    if (!k.base.truncated) EXPECT_GE(dist, 2.0 / (7.0 / 6.0) * k.side - 1e-14);
  }
}

TEST(Cover, BoxWithHole) {
  const Domain d = Domain::with_hole(Box::unit(2), Box::make(2, {0.375, 0.375}, {0.625, 0.625}));
  const WBCover cover = wb_enlarge(d, whitney(d, {6}), 1.0);
  EXPECT_TRUE(cover.audit.passed()) << cover.audit.first_failure;
  for (const WBCube& k : cover.cubes) EXPECT_TRUE(d.contains(k.center));
}

TEST(Partition, SumsToOneAndBoundedBelow) {
  const Domain d = Domain::of(Box::unit(2));
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, {7}), 1.0));
  const PouAudit a = audit_partition(pou, 10000, 3);
  EXPECT_EQ(a.samples, 10000);
  EXPECT_LE(a.max_sum_error, 1e-9);
  EXPECT_GE(a.min_scaled_weight, 1.0 - 1e-12);
  EXPECT_EQ(a.lower_bound_violations, 0);
}

TEST(Partition, SingleSupportGivesOne) {
  const Domain d = Domain::of(Box::unit(2));
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, {6}), 1.0));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  int seen = 0;
  for (int s = 0; s < 5000; ++s) {
    const Point x{u(rng), u(rng)};
    const auto terms = pou.evaluate(x);
    double sum = 0.0;
    for (const auto& t : terms) sum += t.value;
    EXPECT_NEAR(sum, 1.0, 1e-12);
    if (terms.size() == 1) {
      ++seen;
      EXPECT_NEAR(terms[0].value, 1.0, 1e-14);
    }
  }
  EXPECT_GT(seen, 0);
}

TEST(Partition, GradientMatchesFiniteDifferences) {
  const Domain d = Domain::of(Box::unit(2));
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, {5}), 1.0));
  const Point x{0.31, 0.47};
  const double h = 1e-7;
  for (const auto& t : pou.evaluate(x)) {
    for (int a = 0; a < 2; ++a) {
      Point xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double fd = (pou.weight(t.cube, xp) - pou.weight(t.cube, xm)) / (2.0 * h);
      EXPECT_NEAR(t.grad[a], fd, 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(SmoothStep, EndpointsAndMonotone) {
  EXPECT_EQ(smooth_step(0.0), 0.0);
  EXPECT_EQ(smooth_step(1.0), 1.0);
  EXPECT_EQ(smooth_step(-3.0), 0.0);
  EXPECT_EQ(smooth_step(4.0), 1.0);
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = smooth_step(i / 100.0);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Cover, CsvHasOneRowPerCube) {
  const Domain d = Domain::of(Box::unit(2));
  const WBCover cover = wb_enlarge(d, whitney(d, {4}), 1.0);
  std::ostringstream os;
  write_csv(cover, os);
  const std::string s = os.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), cover.cubes.size() + 1);
}

}  // namespace
}  // namespace pqlab
