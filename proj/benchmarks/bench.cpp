#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "motstab/copula.hpp"
#include "motstab/experiment.hpp"
#include "motstab/martingale.hpp"
#include "motstab/pipeline.hpp"
#include "motstab/transport.hpp"

using namespace motstab;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& gen, int n, double lo, double hi) {
  std::uniform_real_distribution<double> pos(lo, hi);
  std::uniform_real_distribution<double> wt(0.1, 1.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({pos(gen), wt(gen)});
  return normalized(DiscreteMeasure(std::move(atoms)));
}

// Two-point martingale kernels of a fixed reach around each atom of mu.
Coupling random_martingale(std::mt19937_64& gen, const DiscreteMeasure& mu) {
  std::uniform_real_distribution<double> reach(0.2, 1.5);
  std::vector<Coupling::Row> rows;
  for (const Atom& a : mu.atoms()) {
    const double l = reach(gen);
    const double r = reach(gen);
    rows.push_back({a.position, a.weight, DiscreteMeasure({{a.position - l, r / (l + r)}, {a.position + r, l / (l + r)}})});
  }
  return Coupling(std::move(rows));
}

void BM_W1d(benchmark::State& state) {
  std::mt19937_64 gen(1);
  const int n = static_cast<int>(state.range(0));
  const auto a = random_measure(gen, n, -5, 5);
  const auto b = random_measure(gen, n, -5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(w_1d(a, b, 1));
  state.SetComplexityN(n);
}
BENCHMARK(BM_W1d)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_OtExact(benchmark::State& state) {
  std::mt19937_64 gen(2);
  const int n = static_cast<int>(state.range(0));
  const auto a = random_measure(gen, n, -5, 5);
  const auto b = random_measure(gen, n, -5, 5);
  const auto cost = power_cost(a, b, 2);
  for (auto _ : state) benchmark::DoNotOptimize(ot_exact(cost, a, b).objective);
}
BENCHMARK(BM_OtExact)->RangeMultiplier(2)->Range(8, 64);

void BM_AwDistance(benchmark::State& state) {
  std::mt19937_64 gen(3);
  const int n = static_cast<int>(state.range(0));
  const auto p = random_martingale(gen, random_measure(gen, n, -3, 3));
  const auto q = random_martingale(gen, random_measure(gen, n, -3, 3));
  const auto threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(aw_distance(p, q, 1, threads).distance);
}
BENCHMARK(BM_AwDistance)->ArgsProduct({{8, 32, 64}, {1, 4}})->Unit(benchmark::kMillisecond);

void BM_Strassen(benchmark::State& state) {
  std::mt19937_64 gen(4);
  const int n = static_cast<int>(state.range(0));
  const auto p = random_martingale(gen, random_measure(gen, n, -3, 3));
  const auto mu = first_marginal(p);
  const auto nu = second_marginal(p);
  for (auto _ : state) benchmark::DoNotOptimize(strassen_coupling(mu, nu).size());
}
BENCHMARK(BM_Strassen)->RangeMultiplier(2)->Range(4, 32)->Unit(benchmark::kMillisecond);

void BM_ApproxCoupling(benchmark::State& state) {
  std::mt19937_64 gen(5);
  const int n = static_cast<int>(state.range(0));
  const auto p = random_martingale(gen, random_measure(gen, n, -3, 3));
  const auto mu_k = random_measure(gen, 2 * n, -3, 3);
  const auto nu_k = random_measure(gen, 4 * n, -5, 5);
  for (auto _ : state) benchmark::DoNotOptimize(approx_coupling(p, mu_k, nu_k).size());
}
BENCHMARK(BM_ApproxCoupling)->RangeMultiplier(4)->Range(8, 512);

void BM_Approximate(benchmark::State& state) {
  const DiscreteMeasure mu({{-2, 0.1}, {-1, 0.2}, {0, 0.4}, {1, 0.2}, {2, 0.1}});
  const DiscreteMeasure nu({{-4, 0.05}, {-3, 0.1}, {-2, 0.2}, {-1, 0.1}, {0, 0.1},
                            {1, 0.1}, {2, 0.2}, {3, 0.1}, {4, 0.05}});
  const auto p = min_cost_martingale(mu, nu);
  const auto [mu_k, nu_k] = perturb_pair(p, {"contract", 0, 0.02}, 1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(approximate(p, mu_k, nu_k, 0.02).second.final_aw1);
}
BENCHMARK(BM_Approximate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
