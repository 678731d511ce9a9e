// Indexed OpenMP energy kernel against the serial O(n^2) reference.
//
//   ./bench_energy --benchmark_filter=gasket
//
// The thread argument of the parallel cases is passed to omp_set_num_threads.
#include <omp.h>

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "kslab/energy.hpp"

namespace {

using namespace kslab;

ScalarField noise(const MeasuredPointCloud& c) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<double> v(c.size());
  for (auto& x : v) x = g(rng);
  return ScalarField(c, std::move(v));
}

// The field points into the cloud, so a case is built once in place and never moved.
struct Case {
  Case(const SpaceSpec& s, double r_, double d_w_) : cloud(build_cloud(s)), field(noise(cloud)), r(r_), d_w(d_w_) {}
  MeasuredPointCloud cloud;
  ScalarField field;
  double r;
  double d_w;
};

Case& interval_case() {
  static Case c(SpaceSpec::interval(4001), 0.01, 2.0);
  return c;
}

Case& square_case() {
  static Case c(SpaceSpec::square(81), 0.05, 2.0);
  return c;
}

Case& gasket_case() {
  static Case c(SpaceSpec::gasket(7), 1.0 / 16.0, std::log(5.0) / std::log(2.0));
  return c;
}

template <Case& (*Get)()>
void parallel(benchmark::State& state) {
  Case& c = Get();
  omp_set_num_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ks_energy(c.field, c.r, c.d_w));
  state.counters["points"] = static_cast<double>(c.cloud.size());
}

template <Case& (*Get)()>
void serial(benchmark::State& state) {
  Case& c = Get();
  for (auto _ : state) benchmark::DoNotOptimize(reference::ks_energy_brute(c.field, c.r, c.d_w));
  state.counters["points"] = static_cast<double>(c.cloud.size());
}

void thread_args(benchmark::internal::Benchmark* b) {
  const int hw = omp_get_num_procs();
  for (int t = 1; t <= hw; t *= 2) b->Arg(t);
  if ((hw & (hw - 1)) != 0) b->Arg(hw);
}

}  // namespace

BENCHMARK(parallel<interval_case>)->Name("interval_4001/indexed")->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(serial<interval_case>)->Name("interval_4001/brute")->Unit(benchmark::kMillisecond);
BENCHMARK(parallel<square_case>)->Name("square_81/indexed")->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(serial<square_case>)->Name("square_81/brute")->Unit(benchmark::kMillisecond);
BENCHMARK(parallel<gasket_case>)->Name("gasket_7/indexed")->Apply(thread_args)->Unit(benchmark::kMillisecond);
BENCHMARK(serial<gasket_case>)->Name("gasket_7/brute")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
