#include <benchmark/benchmark.h>

#include "pemdetect/oracle.hpp"
#include "pemdetect/spectral.hpp"

namespace {

const pem::SystemParams kBase{};
const pem::DamageProfile kDamage{0.5, 0.8, 0.05};

void BM_ElementMatrix(benchmark::State& state) {
    const double omega = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(pem::element_matrix(0.0, 0.75, omega, 1.0, kBase));
}
BENCHMARK(BM_ElementMatrix)->Arg(5)->Arg(60);

void BM_Assemble(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(pem::assemble(7.3, kBase, kDamage));
}
BENCHMARK(BM_Assemble);

void BM_SolveFrf(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(pem::solve_frf(7.3, kBase, kDamage, {0.0, 1.0}));
}
BENCHMARK(BM_SolveFrf);

void BM_FeFrf(benchmark::State& state) {
    const auto sys = pem::fe_assemble(kBase, kDamage, pem::make_mesh(kBase, kDamage, static_cast<int>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(pem::fe_frf(sys, 7.3, {0.0, 1.0}));
}
BENCHMARK(BM_FeFrf)->Arg(50)->Arg(200);

}  // namespace
