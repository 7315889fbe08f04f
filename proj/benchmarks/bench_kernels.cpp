#include <benchmark/benchmark.h>

#include <memory>

#include "rayleigh/collision_operator.hpp"
#include "rayleigh/expansion.hpp"
#include "rayleigh/gamma.hpp"
#include "rayleigh/slab.hpp"

using namespace rayleigh;

namespace {

OperatorPtr op(Backend b, int n) {
  CollisionSettings s;
  s.backend = b;
  s.gamma_angular_order = 4;
  return CollisionOperator::build(build_grid(n, 6.0), s);
}

Eigen::MatrixXd field_block(const VelocityGrid& g, Eigen::Index cols) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(g.size()), cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Vec3& v = g.node(i);
      f(static_cast<Eigen::Index>(i), j) = (v[0] * v[2] + 0.1 * j) * g.sqrt_mu()[static_cast<Eigen::Index>(i)];
    }
  return f;
}

void BM_HardSphereAssembly(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(op(Backend::HardSphere, n));
}
BENCHMARK(BM_HardSphereAssembly)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_HardSphereApply(benchmark::State& st) {
  const OperatorPtr L = op(Backend::HardSphere, static_cast<int>(st.range(0)));
  const Eigen::MatrixXd f = field_block(L->grid(), 64);
  for (auto _ : st) benchmark::DoNotOptimize(L->apply(f));
}
BENCHMARK(BM_HardSphereApply)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ShiftedSolve(benchmark::State& st) {
  const OperatorPtr L = op(Backend::HardSphere, 12);
  const Eigen::MatrixXd f = field_block(L->grid(), 64);
  for (auto _ : st) {
    Eigen::MatrixXd b = f;
    L->solve_shifted(2.5, b);
    benchmark::DoNotOptimize(b);
  }
}
BENCHMARK(BM_ShiftedSolve)->Unit(benchmark::kMillisecond);

void BM_GammaApply(benchmark::State& st) {
  const OperatorPtr L = op(Backend::HardSphere, static_cast<int>(st.range(0)));
  const GammaKernel& gk = L->gamma_kernel();
  const Eigen::MatrixXd f = field_block(L->grid(), 2);
  for (auto _ : st) benchmark::DoNotOptimize(gk.apply(f.col(0), f.col(1)));
}
BENCHMARK(BM_GammaApply)->Arg(8)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_DirectBgkStep(benchmark::State& st) {
  const auto terms = std::make_shared<const ExpansionTerms>(op(Backend::BGK, static_cast<int>(st.range(0))), false);
  SlabConfig c;
  c.n_x = 200;
  c.t_final = 0.5;
  const SlabSolver s(c, make_profile(0.05, terms->kappa(), 0.5), terms);
  SlabState state = s.init_state();
  for (auto _ : st) s.step(state, s.dt());
}
BENCHMARK(BM_DirectBgkStep)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_RemainderBgkStep(benchmark::State& st) {
  const auto terms = std::make_shared<const ExpansionTerms>(op(Backend::BGK, 16), false);
  SlabConfig c;
  c.mode = SlabMode::Remainder;
  c.n_x = 200;
  const SlabSolver s(c, make_profile(0.05, terms->kappa(), 0.5), terms);
  SlabState state = s.init_state();
  for (auto _ : st) s.step(state, s.dt());
}
BENCHMARK(BM_RemainderBgkStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
