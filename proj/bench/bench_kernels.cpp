// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "trajprune/kernels.hpp"
#include "trajprune/trajectory.hpp"

using namespace trajprune;

namespace {

struct Fixture {
  Dataset data;
  Model model;
  TrajectoryBank bank;
  std::vector<double> reference;

  Fixture(std::size_t n, std::size_t window)
      : model({Arch::mlp, 64}, 32, 10), bank(n, window) {
    Rng rng(1);
    BlobGenerator gen(32, 10, 1.7, 1.0, rng);
    data = gen.sample(n, Split::train, rng);
    model = Model::initialized({Arch::mlp, 64}, 32, 10, rng);
    for (std::size_t e = 1; e <= window; ++e) {
      std::vector<LossObservation> obs(n);
      for (std::size_t i = 0; i < n; ++i) obs[i] = {i, uniform01(rng)};
      bank.record_epoch_losses(e, obs);
      reference.push_back(2.0 / static_cast<double>(e));
    }
  }
};

const Fixture& fixture(std::size_t n) {
  static Fixture small(2000, 10), large(20000, 10);
  return n <= 2000 ? small : large;
}

template <bool Parallel>
void BM_dataset_losses(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.data.size());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::dataset_losses(f.model, f.data, out);
    else kernels::serial::dataset_losses(f.model, f.data, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.data.size()));
}

template <bool Parallel>
void BM_alignment_scores(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.data.size());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::parallel::alignment_scores(f.bank, f.reference, Correlation::pearson, out);
    else kernels::serial::alignment_scores(f.bank, f.reference, Correlation::pearson, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.data.size()));
}

template <bool Parallel>
void BM_count_correct(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    std::size_t c = Parallel ? kernels::parallel::count_correct(f.model, f.data, LabelSource::truth)
                             : kernels::serial::count_correct(f.model, f.data, LabelSource::truth);
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(f.data.size()));
}

}  // namespace

BENCHMARK(BM_dataset_losses<false>)->Arg(2000)->Arg(20000)->Name("dataset_losses/serial");
BENCHMARK(BM_dataset_losses<true>)->Arg(2000)->Arg(20000)->Name("dataset_losses/parallel");
BENCHMARK(BM_alignment_scores<false>)->Arg(2000)->Arg(20000)->Name("alignment_scores/serial");
BENCHMARK(BM_alignment_scores<true>)->Arg(2000)->Arg(20000)->Name("alignment_scores/parallel");
BENCHMARK(BM_count_correct<false>)->Arg(2000)->Arg(20000)->Name("count_correct/serial");
BENCHMARK(BM_count_correct<true>)->Arg(2000)->Arg(20000)->Name("count_correct/parallel");

int main(int argc, char** argv) {
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::AddCustomContext("omp_threads", std::to_string(omp_get_max_threads()));
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
