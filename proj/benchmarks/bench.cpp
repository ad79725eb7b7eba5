// Throughput benchmarks for the hot paths: sampling, the moment estimators,
// the robust location fit, and the ARCH recursion.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "ellmom/blocks.hpp"
#include "ellmom/elliptical.hpp"
#include "ellmom/estimators.hpp"
#include "ellmom/realized_xi.hpp"
#include "ellmom/rng.hpp"
#include "ellmom/robust.hpp"

using namespace ellmom;

namespace {

EllipticalSpec make_spec(int p) {
  return EllipticalSpec(Eigen::VectorXd::Zero(p), covariance_banded(p, 0.5),
                        GaussianRadial{});
}

BlockCollection pair_blocks(int p) {
  std::vector<std::vector<int>> blocks;
  for (int j = 0; j + 1 < p; j += 2) blocks.push_back({j, j + 1});
  return BlockCollection(std::move(blocks), p, "aligned(k=2)");
}

void BM_sample(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  EllipticalSpec spec = make_spec(p);
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample(spec, 100, rng));
  state.SetItemsProcessed(state.iterations() * 100 * p);
}
BENCHMARK(BM_sample)->Arg(50)->Arg(200)->Arg(500);

void BM_mae(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  EllipticalSpec spec = make_spec(p);
  RngStream rng(2, 0);
  SampleMatrix samples = sample(spec, 200, rng);
  LocationScale loc = truth_location_scale(spec.mu(), spec.sigma(), nullptr);
  MomentOrder m(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(mae_estimator(samples, loc, m));
  state.SetItemsProcessed(state.iterations() * 200 * p);
}
BENCHMARK(BM_mae)->Arg(50)->Arg(200)->Arg(500);

void BM_ideal(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  EllipticalSpec spec = make_spec(p);
  RngStream rng(3, 0);
  SampleMatrix samples = sample(spec, 200, rng);
  MomentOrder m(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        ideal_estimator(samples, spec.mu(), spec.omega(), m));
}
BENCHMARK(BM_ideal)->Arg(50)->Arg(200);

void BM_bae_pairs(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  EllipticalSpec spec = make_spec(p);
  BlockCollection blocks = pair_blocks(p);
  RngStream rng(4, 0);
  SampleMatrix samples = sample(spec, 200, rng);
  LocationScale loc = truth_location_scale(spec.mu(), spec.sigma(), &blocks);
  MomentOrder m(2);
  for (auto _ : state)
    benchmark::DoNotOptimize(bae_estimator(samples, blocks, loc, m));
}
BENCHMARK(BM_bae_pairs)->Arg(50)->Arg(200);

void BM_huber_location(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  RngStream rng(5, 0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = rng.normal();
  x(0) = 50.0;  // one gross point so the weights stay active
  HuberConfig config;
  for (auto _ : state)
    benchmark::DoNotOptimize(huber_location(x, 1.5, config));
}
BENCHMARK(BM_huber_location)->Arg(100)->Arg(1000);

void BM_arch_fit(benchmark::State& state) {
  const int t_len = static_cast<int>(state.range(0));
  RngStream rng(6, 0);
  Eigen::VectorXd z(t_len);
  double prev = 0.0;
  for (int t = 0; t < t_len; ++t) {
    double lambda = 0.8 + 0.3 * prev * prev;
    z(t) = std::sqrt(lambda) * rng.normal();
    prev = z(t);
  }
  for (auto _ : state) benchmark::DoNotOptimize(arch_fit(z, 1));
}
BENCHMARK(BM_arch_fit)->Arg(250)->Arg(1000);

void BM_threshold_blocks(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Eigen::MatrixXd sigma = covariance_banded(p, 0.6);
  for (auto _ : state)
    benchmark::DoNotOptimize(threshold_blocks(sigma, 0.3));
}
BENCHMARK(BM_threshold_blocks)->Arg(100)->Arg(400);

}  // namespace

BENCHMARK_MAIN();
