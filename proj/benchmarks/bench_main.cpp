#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "thermal/fkn.hpp"
#include "thermal/interactions.hpp"
#include "thermal/pathspace.hpp"
#include "thermal/quasifree.hpp"
#include "thermal/standard_form.hpp"

using namespace thermal;

namespace {

void BM_SamplePaths(benchmark::State& state) {
  const auto sys = build_neutral(ModeGrid{0.5, 4, 1.0}, 1.0);
  SamplerOptions opt;
  opt.n_samples = static_cast<std::size_t>(state.range(0));
  opt.n_mats = 8192;
  for (auto _ : state) benchmark::DoNotOptimize(sample_paths(sys, TimeGrid{1.0, 32}, opt));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SamplePaths)->Arg(1000)->Arg(10000);

void BM_GreensWeyl(benchmark::State& state) {
  const auto sys = DiagonalSystem::from_frequencies({0.5, 1.0, 1.5, 2.0, 2.5}, 1.0);
  std::vector<WeylFactor> factors;
  for (int i = 0; i < state.range(0); ++i) factors.push_back({cplx(0.1 * i, 0.0), TestVector::unit(5, i % 5)});
  const auto word = WeylWord::with_times(factors);
  for (auto _ : state) benchmark::DoNotOptimize(greens_weyl(sys, word));
}
BENCHMARK(BM_GreensWeyl)->Arg(2)->Arg(8);

void BM_PotentialTable(benchmark::State& state) {
  const ModeGrid grid{0.5, 8, 1.0};
  SamplerOptions opt;
  opt.n_samples = 2000;
  const auto e = sample_paths(build_neutral(grid, 1.0), TimeGrid{1.0, 16}, opt);
  InteractionSpec spec;
  spec.coefficients = {0, 0, 0, 0, 1};
  spec.cutoff.g = spatial_cutoff(grid, "box:2");
  const CutoffInteraction v(grid, 1.0, spec);
  for (auto _ : state)
    benchmark::DoNotOptimize(PotentialTable::evaluate(e, [&v](std::span<const double> s) { return v(s); }));
}
BENCHMARK(BM_PotentialTable);

void BM_ExactL2(benchmark::State& state) {
  const ModeGrid grid{0.5, 16, 1.0};
  InteractionSpec spec;
  spec.coefficients = {0, 0, 0.5, 0, 1};
  spec.cutoff.g = spatial_cutoff(grid, "box:2");
  for (auto _ : state) benchmark::DoNotOptimize(exact_l2_inner(grid, 1.0, spec, spec));
}
BENCHMARK(BM_ExactL2);

void BM_LiouvilleanVerify(benchmark::State& state) {
  const auto form = gns_build(random_kms_system(state.range(0), 1.0, 3));
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(state.range(0), -1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(liouvillean_verify(form, v));
}
BENCHMARK(BM_LiouvilleanVerify)->Arg(4)->Arg(8);

void BM_OscillatorTwoPoint(benchmark::State& state) {
  OscillatorSpec spec;
  spec.potential = {0, 0, 0, 0, 0.1};
  for (auto _ : state) benchmark::DoNotOptimize(oscillator_two_point(spec, 0.25));
}
BENCHMARK(BM_OscillatorTwoPoint)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
