#include <benchmark/benchmark.h>

#include <random>

#include "gmmot/fit.hpp"
#include "gmmot/multimarginal.hpp"
#include "gmmot/mw2.hpp"
#include "gmmot/transport_lp.hpp"

namespace {

using namespace gmmot;

Gmm random_gmm(std::mt19937_64& rng, int d, int k) {
  std::normal_distribution<double> normal;
  std::vector<Gaussian> comps;
  Vector w(k);
  for (int c = 0; c < k; ++c) {
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = normal(rng);
    Vector m(d);
    for (int i = 0; i < d; ++i) m(i) = normal(rng);
    comps.emplace_back(m, SpdMatrix(a.transpose() * a / d + 0.1 * Matrix::Identity(d, d)));
    w(c) = 1.0 + c;
  }
  return {w / w.sum(), comps};
}

void BM_Mw2(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int d = static_cast<int>(state.range(0));
  const Gmm a = random_gmm(rng, d, 10);
  const Gmm b = random_gmm(rng, d, 10);
  for (auto _ : state) benchmark::DoNotOptimize(mw2(a, b).squared);
}
BENCHMARK(BM_Mw2)->Arg(3)->Arg(27)->Unit(benchmark::kMillisecond);

void BM_SolveTransport(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> unif;
  const int k = static_cast<int>(state.range(0));
  Matrix cost(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) cost(i, j) = unif(rng);
  const Vector p = Vector::Constant(k, 1.0 / k);
  for (auto _ : state) benchmark::DoNotOptimize(solve_transport(cost, p, p).value);
}
BENCHMARK(BM_SolveTransport)->Arg(10)->Arg(40);

void BM_FitEm(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const Gmm truth = random_gmm(rng, 3, 10);
  const PointCloud pts = sample(truth, static_cast<int>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_em(pts, 10, 5).size());
}
BENCHMARK(BM_FitEm)->Arg(16384)->Unit(benchmark::kMillisecond);

void BM_Barycenter(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const std::vector<Gmm> gmms{random_gmm(rng, 2, 3), random_gmm(rng, 2, 4), random_gmm(rng, 2, 4), random_gmm(rng, 2, 3)};
  const Vector w = Vector::Constant(4, 0.25);
  for (auto _ : state) benchmark::DoNotOptimize(mw2_barycenter(gmms, w).cost);
}
BENCHMARK(BM_Barycenter)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
