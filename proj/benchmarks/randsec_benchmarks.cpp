#include <benchmark/benchmark.h>

#include "randsec/bergman_space.hpp"
#include "randsec/ensembles.hpp"
#include "randsec/polynomial.hpp"
#include "randsec/zeros.hpp"

using namespace randsec;

namespace {

BergmanBasis basis_for(const Weight& w, int p) {
  return build_basis(WeightSequence(w), p, make_fs_quadrature(default_quadrature_spec(p, w)));
}

void BM_BuildBasisFubiniStudy(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(basis_for(Weight::fubini_study(), p));
}
BENCHMARK(BM_BuildBasisFubiniStudy)->Arg(25)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BuildBasisTranslated(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(basis_for(Weight::translated_fs(Complex(1.0, 0.0)), p));
}
BENCHMARK(BM_BuildBasisTranslated)->Arg(25)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BuildBasisQuartic(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(basis_for(custom_weight("quartic"), p));
}
BENCHMARK(BM_BuildBasisQuartic)->Arg(25)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_CompanionRoots(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  Rng rng = make_rng(1);
  const CVector c = sample(Ensemble::gaussian(), p + 1, rng);
  for (auto _ : state) benchmark::DoNotOptimize(companion_roots(c));
}
BENCHMARK(BM_CompanionRoots)->Arg(25)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_FindZeros(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const BergmanBasis b = basis_for(Weight::fubini_study(), p);
  Rng rng = make_rng(2);
  const RandomSection s = assemble_section(b, sample(Ensemble::gaussian(), b.dimension(), rng));
  for (auto _ : state) benchmark::DoNotOptimize(find_zeros(s));
}
BENCHMARK(BM_FindZeros)->Arg(25)->Arg(100)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_Sample(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const Ensemble ensembles[] = {Ensemble::gaussian(), Ensemble::fs_volume(), Ensemble::sphere(),
                                Ensemble::heavy_tail(4.0)};
  const Ensemble& e = ensembles[state.range(1)];
  state.SetLabel(e.name());
  Rng rng = make_rng(3);
  double ls = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(sample_scaled(e, k, rng, &ls));
  state.SetItemsProcessed(state.iterations() * k);
}
BENCHMARK(BM_Sample)->ArgsProduct({{256}, {0, 1, 2, 3}});

void BM_MomentEstimate(benchmark::State& state) {
  Rng rng = make_rng(4);
  const CVector u = random_unit_vector(64, rng);
  const double nus[] = {1.0, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(moment_B_parallel(Ensemble::gaussian(), u, nus, 100000, 5, 1));
  }
}
BENCHMARK(BM_MomentEstimate)->Unit(benchmark::kMillisecond);

void BM_PotentialL1(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const BergmanBasis b = basis_for(Weight::fubini_study(), p);
  Rng rng = make_rng(6);
  const RandomSection s = assemble_section(b, sample(Ensemble::gaussian(), b.dimension(), rng));
  QuadratureSpec spec;
  const Quadrature q = make_fs_quadrature(spec);
  for (auto _ : state) benchmark::DoNotOptimize(potential_l1_distance(s, b.weight(), q));
}
BENCHMARK(BM_PotentialL1)->Arg(25)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_RadialCdf(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const BergmanBasis b = basis_for(Weight::fubini_study(), p);
  Rng rng = make_rng(7);
  const ZeroSet z = find_zeros(assemble_section(b, sample(Ensemble::gaussian(), b.dimension(), rng)));
  for (auto _ : state) benchmark::DoNotOptimize(radial_cdf_distance(z, b.weight()));
}
BENCHMARK(BM_RadialCdf)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_BergmanKernel(benchmark::State& state) {
  const BergmanBasis b = basis_for(Weight::fubini_study(), 100);
  const Complex z(0.3, 0.4);
  const Complex w(-1.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(log_bergman_kernel_norm(b, z, w));
}
BENCHMARK(BM_BergmanKernel)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
