#include <benchmark/benchmark.h>

#include "pqlab/besov.hpp"
#include "pqlab/covering.hpp"
#include "pqlab/mollify.hpp"
#include "pqlab/solver.hpp"

namespace {

using namespace pqlab;

const IntegrandSpec kDoublePhase{"double-phase", {{"p", "2"}, {"q", "2.5"}, {"a", "max(0, x1 - x2)^1"}}};

void BM_Minimize(benchmark::State& state) {
  const Integrand f = from_spec(kDoublePhase);
  const Mesh mesh = Mesh::uniform(f.domain(), static_cast<int>(state.range(0)));
  const VectorFunction g = VectorFunction::parse("sin(3*x1)*x2");
  for (auto _ : state) {
    SolveResult r = minimize(f, mesh, g, std::nullopt, 0.0);
    benchmark::DoNotOptimize(r.report.energy);
  }
}
BENCHMARK(BM_Minimize)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ElResidual(benchmark::State& state) {
  const Integrand f = from_spec(kDoublePhase);
  const Mesh mesh = Mesh::uniform(f.domain(), static_cast<int>(state.range(0)));
  const DiscreteField u = interpolate(mesh, VectorFunction::parse("sin(3*x1)*x2"));
  for (auto _ : state) benchmark::DoNotOptimize(el_residual(f, u, std::nullopt));
}
BENCHMARK(BM_ElResidual)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Whitney(benchmark::State& state) {
  const Domain d = Domain::of(Box::unit(2));
  WhitneyOptions o;
  o.depth = static_cast<int>(state.range(0));
  for (auto _ : state) {
    WBCover c = wb_enlarge(d, whitney(d, o), 1.0);
    benchmark::DoNotOptimize(c.audit.multiplicity);
  }
}
BENCHMARK(BM_Whitney)->Arg(6)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_PartitionEvaluate(benchmark::State& state) {
  const Domain d = Domain::of(Box::unit(2));
  WhitneyOptions o;
  o.depth = 8;
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, o), 1.0));
  double t = 0.0;
  for (auto _ : state) {
    t = t > 0.9 ? 0.013 : t + 0.0137;
    benchmark::DoNotOptimize(pou.evaluate({t, 1.0 - t * 0.7}));
  }
}
BENCHMARK(BM_PartitionEvaluate);

void BM_WbApproximant(benchmark::State& state) {
  const Integrand f = from_spec(kDoublePhase);
  const Mesh mesh = Mesh::uniform(f.domain(), static_cast<int>(state.range(0)));
  const DiscreteField u = interpolate(mesh, VectorFunction::parse("sqrt(sqrt((x1 - 0.43)^2 + (x2 - 0.57)^2))"));
  const ApproximantConfig cfg = ApproximantConfig::make(f.params(), 4.0);
  const Domain d = Domain::of(f.domain());
  WhitneyOptions o;
  o.depth = 6;
  const PartitionOfUnity pou(wb_enlarge(d, whitney(d, o), cfg.m_exponent, false));
  for (auto _ : state) {
    DiscreteField v = wb_approximant(u, pou, cfg);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_WbApproximant)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_DifferenceQuotient(benchmark::State& state) {
  const Mesh mesh = Mesh::uniform(Box::unit(2), static_cast<int>(state.range(0)));
  const DiscreteField u = interpolate(mesh, VectorFunction::parse("sqrt(abs(x1 - 0.5))"));
  for (auto _ : state) {
    BesovReport r = dq_seminorm(u, 0.5, 2.0, ConeSpec{}, 8);
    benchmark::DoNotOptimize(r.seminorm);
  }
}
BENCHMARK(BM_DifferenceQuotient)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
