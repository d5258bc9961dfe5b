#include <benchmark/benchmark.h>

#include "live/inference.hpp"
#include "live/logistic.hpp"
#include "live/projection.hpp"
#include "live/simulation.hpp"

namespace {

live::ExperimentContext paper_context(int n) {
  live::SimulationConfig cfg;
  cfg.n = n;
  cfg.p = 501;
  cfg.loading.r = 1.0 / 25.0;
  cfg.n_reps = 1000000;
  cfg.master_seed = 99;
  return live::make_experiment_context(cfg);
}

void BM_Cholesky500(benchmark::State& state) {
  const Eigen::MatrixXd sigma = live::make_ar_covariance(500, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(live::cholesky(sigma));
}
BENCHMARK(BM_Cholesky500);

void BM_LassoFit(benchmark::State& state) {
  const live::ExperimentContext ctx = paper_context(static_cast<int>(state.range(0)));
  live::RngStream stream(1, 0);
  const live::Dataset data =
      live::gen_dataset(ctx.config.n, ctx.beta_true, ctx.design_chol, stream);
  const double lambda =
      0.5 * std::sqrt(std::log(501.0) / ctx.config.n);
  for (auto _ : state)
    benchmark::DoNotOptimize(live::fit_logistic_lasso(data, lambda));
}
BENCHMARK(BM_LassoFit)->Arg(200)->Arg(400);

void BM_CrossValidation(benchmark::State& state) {
  const live::ExperimentContext ctx = paper_context(static_cast<int>(state.range(0)));
  live::RngStream stream(1, 0);
  const live::Dataset data =
      live::gen_dataset(ctx.config.n, ctx.beta_true, ctx.design_chol, stream);
  for (auto _ : state) {
    live::RngStream cv_stream(2, 0);
    benchmark::DoNotOptimize(live::cross_validate_lambda(data, cv_stream));
  }
}
BENCHMARK(BM_CrossValidation)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_ProjectionDirection(benchmark::State& state) {
  const live::ExperimentContext ctx = paper_context(static_cast<int>(state.range(0)));
  live::RngStream stream(1, 0);
  const live::Dataset data =
      live::gen_dataset(ctx.config.n, ctx.beta_true, ctx.design_chol, stream);
  const live::Gram gram = live::sample_gram(data);
  for (auto _ : state)
    benchmark::DoNotOptimize(live::projection_direction(gram, ctx.loading));
}
BENCHMARK(BM_ProjectionDirection)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_FullReplication(benchmark::State& state) {
  const live::ExperimentContext ctx = paper_context(static_cast<int>(state.range(0)));
  int rep = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(live::run_replication(ctx, rep++ % ctx.config.n_reps));
}
BENCHMARK(BM_FullReplication)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
