#include <benchmark/benchmark.h>

#include "mfsr/degrade.hpp"
#include "mfsr/nltv.hpp"
#include "mfsr/random.hpp"
#include "mfsr/solver.hpp"
#include "mfsr/testcards.hpp"

namespace {

struct Scene {
  mfsr::Image truth;
  std::vector<mfsr::Image> stack;
  std::vector<mfsr::FrameMotion> motions;
  mfsr::BlurKernel blur = mfsr::BlurKernel::gaussian(3, 1.0);
};

Scene make_scene(int size, int frames) {
  Scene s;
  s.truth = mfsr::make_test_card(mfsr::TestCard::roads, size, size);
  for (auto& f : mfsr::simulate_stack(s.truth, frames, 4, s.blur, 0.001, 7)) {
    s.stack.push_back(f.image);
    s.motions.push_back(f.motion);
  }
  return s;
}

void BM_Apply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mfsr::Image z = mfsr::make_test_card(mfsr::TestCard::disks, n, n);
  const mfsr::DegradationOperator op{{1.3, 2.6}, mfsr::BlurKernel::gaussian(3, 1.0), 4, 0};
  for (auto _ : state) benchmark::DoNotOptimize(mfsr::apply(op, z));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_Apply)->Arg(64)->Arg(256);

void BM_ApplyAdjoint(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mfsr::Image r = mfsr::make_test_card(mfsr::TestCard::disks, n / 4, n / 4);
  const mfsr::DegradationOperator op{{1.3, 2.6}, mfsr::BlurKernel::gaussian(3, 1.0), 4, 0};
  for (auto _ : state) benchmark::DoNotOptimize(mfsr::apply_adjoint(op, r, n, n));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_ApplyAdjoint)->Arg(64)->Arg(256);

void BM_SparseOperator(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mfsr::Image z = mfsr::make_test_card(mfsr::TestCard::disks, n, n);
  const mfsr::SparseOperator op({{1.3, 2.6}, mfsr::BlurKernel::gaussian(3, 1.0), 4, 0}, n, n);
  std::vector<double> out(op.rows());
  for (auto _ : state) {
    op.apply(z.pixels(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_SparseOperator)->Arg(64)->Arg(256);

void BM_BuildGraph(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mfsr::Image z = mfsr::make_test_card(mfsr::TestCard::roads, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(mfsr::build_graph(z, 3, 10, 10, 10.0));
  state.SetItemsProcessed(state.iterations() * n * n);
}
BENCHMARK(BM_BuildGraph)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_SolveZ(benchmark::State& state) {
  const Scene s = make_scene(64, 16);
  const auto ops = mfsr::make_operators(s.motions, s.blur, 4);
  mfsr::SolverState st;
  st.z = mfsr::nui_initialize(s.stack, s.motions, 4);
  st.b = st.z;
  st.u = mfsr::Image(64, 64);
  st.weights.assign(16 * 16 * 16, 1.0);
  mfsr::SolverConfig cfg;
  cfg.pcg_max_iters = static_cast<int>(state.range(0));
  cfg.pcg_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(mfsr::solve_z(st, s.stack, ops, nullptr, cfg));
}
BENCHMARK(BM_SolveZ)->Arg(20)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  const Scene s = make_scene(64, 16);
  mfsr::ReconstructionConfig cfg;
  cfg.solver.ablation = mfsr::Ablation::nltv_gpt;
  cfg.solver.max_outer = static_cast<int>(state.range(0));
  cfg.solver.early_stop_tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(mfsr::reconstruct(s.stack, s.motions, s.blur, 4, cfg));
}
BENCHMARK(BM_Reconstruct)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
