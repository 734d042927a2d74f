#include <benchmark/benchmark.h>

#include "linsys/closure.hpp"
#include "linsys/designs.hpp"
#include "linsys/linalg.hpp"
#include "linsys/rng.hpp"
#include "linsys/simplex.hpp"
#include "linsys/testkit.hpp"

namespace {

using namespace linsys;

void bm_pseudoinverse(benchmark::State& state) {
  const Index k = state.range(0);
  Rng rng(2024);
  Matrix m(k, k / 2);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(pseudoinverse(m));
}
BENCHMARK(bm_pseudoinverse)->Arg(8)->Arg(32)->Arg(128);

void bm_closure_check(benchmark::State& state) {
  const Design design = Design::fh();
  const Triple t = design.population_triple(22.0);
  for (auto _ : state) benchmark::DoNotOptimize(member_closure(t));
}
BENCHMARK(bm_closure_check);

void bm_estimate(benchmark::State& state) {
  const Index n = state.range(0);
  const Design design = Design::fh();
  const Dataset data = design.data(n, 7);
  const MomentModel model = design.model(22.0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate(model, data));
}
BENCHMARK(bm_estimate)->Arg(500)->Arg(2000)->Arg(8000);

void bm_run_test(benchmark::State& state) {
  const Index n = state.range(0);
  const Design design = Design::cox(3);
  const Dataset data = design.data(n, 11);
  const MomentModel model = design.model(0.0);
  TestOptions opts;
  opts.seed = 5;
  const MethodChoice method = MethodChoice::screening();
  for (auto _ : state) benchmark::DoNotOptimize(run_test(model, data, method, opts));
}
BENCHMARK(bm_run_test)->Arg(500)->Arg(2000);

void bm_direction_lp(benchmark::State& state) {
  const Design design = Design::goff();
  const Dataset data = design.data(2000, 3);
  const MomentModel model = design.model(0.62);
  const EstimationResult est = estimate(model, data);
  const MethodChoice method = MethodChoice::direct();
  const JstarSplit js = resolve_jstar(model, method);
  const Vector y0 = solve_prelim(est, js, data.n());
  const Vector w = compute_weights(est, y0, js, method, data.n());
  for (auto _ : state) benchmark::DoNotOptimize(solve_direction(est, w, js, data.n()));
}
BENCHMARK(bm_direction_lp);

}  // namespace

BENCHMARK_MAIN();
