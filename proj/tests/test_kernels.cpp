#include <omp.h>

#include <vector>

#include "doctest.h"
#include "trajprune/errors.hpp"
#include "trajprune/kernels.hpp"
#include "trajprune/trajectory.hpp"

using namespace trajprune;

namespace {

Dataset blobs(std::size_t n, Rng& rng) {
  BlobGenerator gen(6, 4, 1.0, 1.0, rng);
  return gen.sample(n, Split::train, rng);
}

}  // namespace

TEST_CASE("serial and parallel kernels agree bit for bit") {
  Rng rng(10);
  const Dataset data = blobs(733, rng);
  const Model model = Model::initialized({Arch::mlp, 9}, 6, 4, rng);
  for (int threads : {1, 3, 8}) {
    omp_set_num_threads(threads);
    std::vector<double> a(data.size()), b(data.size());
    kernels::serial::dataset_losses(model, data, a);
    kernels::parallel::dataset_losses(model, data, b);
    CHECK(a == b);

    std::vector<std::size_t> ids{5, 0, 700, 5, 42};
    std::vector<double> sa(ids.size()), sb(ids.size());
    kernels::serial::subset_losses(model, data, ids, sa);
    kernels::parallel::subset_losses(model, data, ids, sb);
    CHECK(sa == sb);
    CHECK(sa[0] == a[5]);

    CHECK(kernels::serial::count_correct(model, data, LabelSource::truth) ==
          kernels::parallel::count_correct(model, data, LabelSource::truth));

    TrajectoryBank bank(data.size(), 6);
    std::vector<double> reference;
    for (std::size_t e = 1; e <= 9; ++e) {
      std::vector<LossObservation> obs;
      for (std::size_t i = 0; i < data.size(); ++i)
        if (e == 1 || (i + e) % 3 != 0) obs.push_back({i, uniform01(rng)});
      bank.record_epoch_losses(e, obs);
      reference.push_back(1.0 / static_cast<double>(e));
    }
    reference.erase(reference.begin(), reference.end() - 6);
    for (auto kind : {Correlation::pearson, Correlation::cosine}) {
      std::vector<double> da(data.size()), db(data.size());
      kernels::serial::alignment_scores(bank, reference, kind, da);
      kernels::parallel::alignment_scores(bank, reference, kind, db);
      CHECK(da == db);
    }
  }
  omp_set_num_threads(1);
}

TEST_CASE("kernels validate before entering a parallel region") {
  Rng rng(1);
  const Dataset data = blobs(10, rng);
  const Model wrong({Arch::linear, 0}, 3, 4);
  std::vector<double> out(10);
  CHECK_THROWS_AS(kernels::parallel::dataset_losses(wrong, data, out), ConfigError);
  const Model model({Arch::linear, 0}, 6, 4);
  std::vector<double> small(3);
  CHECK_THROWS_AS(kernels::parallel::dataset_losses(model, data, small), ConfigError);
  std::vector<std::size_t> bad{11};
  std::vector<double> one(1);
  CHECK_THROWS_AS(kernels::parallel::subset_losses(model, data, bad, one), ConfigError);
  CHECK_THROWS_AS(kernels::serial::subset_losses(model, data, bad, one), std::out_of_range);
  TrajectoryBank bank(10, 3);
  std::vector<double> ref{1.0};
  CHECK_THROWS_AS(kernels::parallel::alignment_scores(bank, ref, Correlation::pearson, out), ConfigError);
}
