#include <cmath>
#include <vector>

#include "doctest.h"
#include "trajprune/errors.hpp"
#include "trajprune/trajectory.hpp"

using namespace trajprune;

namespace {

std::vector<LossObservation> obs(std::initializer_list<std::pair<std::size_t, double>> xs) {
  std::vector<LossObservation> v;
  for (auto [id, l] : xs) v.push_back({id, l});
  return v;
}

Dataset tiny_set(std::vector<std::vector<double>> xs, std::vector<int> labels) {
  Dataset d;
  d.num_classes = 3;
  d.split = Split::reference;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Sample s;
    s.id = i;
    s.features = xs[i];
    s.noisy_label = s.true_label = labels[i];
    d.samples.push_back(s);
  }
  return d;
}

}  // namespace

TEST_CASE("first write and carry-forward") {
  TrajectoryBank bank(2, 5);
  bank.record_epoch_losses(1, obs({{0, 2.0}, {1, 3.0}}));
  CHECK(bank.read_window(0) == std::vector<double>{2.0});
  CHECK(bank.read_window(1) == std::vector<double>{3.0});
  CHECK(bank.fill_count(0) == 1);
  CHECK(bank.length() == 1);

  bank.record_epoch_losses(2, obs({{0, 1.5}}));
  CHECK(bank.read_window(0) == std::vector<double>{2.0, 1.5});
  CHECK(bank.read_window(1) == std::vector<double>{3.0, 3.0});
  CHECK(bank.carried(1));
  CHECK_FALSE(bank.carried(0));
  CHECK(bank.last_observed(1) == 3.0);
}

TEST_CASE("window of three after five epochs") {
  TrajectoryBank bank(1, 3);
  double v = 5.0;
  for (std::size_t e = 1; e <= 5; ++e, v -= 1.0) bank.record_epoch_losses(e, obs({{0, v}}));
  CHECK(bank.read_window(0) == std::vector<double>{3.0, 2.0, 1.0});
}

TEST_CASE("full window returns everything in order") {
  TrajectoryBank bank(1, 4);
  for (std::size_t e = 1; e <= 4; ++e) bank.record_epoch_losses(e, obs({{0, 10.0 * e}}));
  CHECK(bank.read_window(0) == std::vector<double>{10, 20, 30, 40});
}

TEST_CASE("duplicate observations are averaged") {
  TrajectoryBank bank(1, 2);
  bank.record_epoch_losses(1, obs({{0, 1.0}, {0, 3.0}}));
  CHECK(bank.read_window(0) == std::vector<double>{2.0});
}

TEST_CASE("errors") {
  TrajectoryBank bank(2, 3);
  CHECK_THROWS_AS(bank.read_window(0), ConfigError);
  CHECK_THROWS_AS(bank.record_epoch_losses(1, obs({{0, 1.0}})), ConfigError);  // sample 1 never seen
  CHECK_THROWS_AS(bank.record_epoch_losses(1, obs({{0, 1.0}, {2, 1.0}})), ConfigError);
  CHECK_THROWS_AS(bank.record_epoch_losses(2, obs({{0, 1.0}, {1, 1.0}})), ConfigError);
  bank.record_epoch_losses(1, obs({{0, 1.0}, {1, 1.0}}));
  CHECK_THROWS_AS(bank.record_epoch_losses(1, obs({{0, 1.0}, {1, 1.0}})), ConfigError);
  CHECK_THROWS_AS(bank.read_window(2), ConfigError);
  CHECK_THROWS_AS(TrajectoryBank(3, 0), ConfigError);
}

TEST_CASE("property: read-out equals a shadow append-only log") {
  Rng rng(4);
  for (std::size_t N : {1u, 2u, 5u, 10u}) {
    const std::size_t n = 20;
    TrajectoryBank bank(n, N);
    std::vector<std::vector<double>> shadow(n);
    std::vector<double> last(n, 0.0);
    for (std::size_t e = 1; e <= 37; ++e) {
      std::vector<LossObservation> o;
      for (std::size_t i = 0; i < n; ++i) {
        if (e == 1 || uniform01(rng) < 0.6) {
          last[i] = uniform01(rng) * 4.0;
          o.push_back({i, last[i]});
        }
        shadow[i].push_back(last[i]);
      }
      bank.record_epoch_losses(e, o);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = std::min(N, e);
        const std::vector<double> want(shadow[i].end() - static_cast<std::ptrdiff_t>(len), shadow[i].end());
        REQUIRE(bank.read_window(i) == want);
        CHECK(bank.fill_count(i) <= std::min(N, bank.epochs_recorded()));
        CHECK(bank.fill_count(i) >= 1);
      }
    }
  }
}

TEST_CASE("property: a sample pruned for k epochs has k identical trailing entries") {
  TrajectoryBank bank(2, 8);
  bank.record_epoch_losses(1, obs({{0, 1.0}, {1, 0.9}}));
  bank.record_epoch_losses(2, obs({{0, 0.8}, {1, 0.7}}));
  for (std::size_t e = 3; e <= 6; ++e) bank.record_epoch_losses(e, obs({{0, 1.0 / e}}));
  const auto w = bank.read_window(1);
  REQUIRE(w.size() == 6);
  for (std::size_t j = 2; j < 6; ++j) CHECK(w[j] == 0.7);
  CHECK(w[0] == 0.9);
}

TEST_CASE("property: storage does not grow with epochs") {
  TrajectoryBank bank(3, 4);
  const auto size = bank.raw().size();
  for (std::size_t e = 1; e <= 100; ++e) bank.record_epoch_losses(e, obs({{0, 1.0}, {1, 2.0}, {2, 3.0}}));
  CHECK(bank.raw().size() == size);
  CHECK(size == 12);
}

TEST_CASE("reference: singleton and two-sample means") {
  // zero model, 3 classes: every loss is ln 3
  Model m({Arch::linear, 0}, 2, 3);
  ReferenceTrajectory ref(4);
  CHECK(ref.record_reference_loss(m, tiny_set({{1, 1}}, {0})) == doctest::Approx(std::log(3.0)));

  ReferenceTrajectory pushed(4);
  pushed.push(1.7);
  CHECK(pushed.read() == std::vector<double>{1.7});
  pushed.push((1.0 + 3.0) / 2);
  CHECK(pushed.read() == std::vector<double>{1.7, 2.0});
}

TEST_CASE("reference: two samples with losses 1 and 3") {
  // class 0 logit = x, class 1 logit = 0, so label 1 costs log(1 + e^x)
  Model m({Arch::linear, 0}, 1, 2);
  m.weights(0)[0] = 1.0;
  Dataset d = tiny_set({{std::log(std::exp(1.0) - 1.0)}, {std::log(std::exp(3.0) - 1.0)}}, {1, 1});
  d.num_classes = 2;
  CHECK(per_sample_loss(m, d[0]) == doctest::Approx(1.0).epsilon(1e-12));
  ReferenceTrajectory ref(3);
  CHECK(ref.record_reference_loss(m, d) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(ref.read().size() == 1);
}

TEST_CASE("reference: equals a naive loop-and-average oracle") {
  Rng rng(17);
  Model m = Model::initialized({Arch::mlp, 6}, 4, 3, rng);
  Dataset d;
  d.num_classes = 3;
  std::normal_distribution<double> g;
  for (std::size_t i = 0; i < 257; ++i) {
    Sample s;
    s.id = i;
    s.features = {g(rng), g(rng), g(rng), g(rng)};
    s.noisy_label = s.true_label = static_cast<int>(i % 3);
    d.samples.push_back(s);
  }
  double sum = 0.0;
  for (const auto& s : d.samples) sum += per_sample_loss(m, s);
  ReferenceTrajectory ref(2);
  CHECK(std::abs(ref.record_reference_loss(m, d) - sum / 257.0) <= 1e-12);
}

TEST_CASE("reference: empty set is an error, ring keeps the last N") {
  Model m({Arch::linear, 0}, 1, 2);
  ReferenceTrajectory ref(3);
  CHECK_THROWS_AS(ref.record_reference_loss(m, Dataset{}), ConfigError);
  for (double v : {1.0, 2.0, 3.0, 4.0, 5.0}) ref.push(v);
  CHECK(ref.read() == std::vector<double>{3.0, 4.0, 5.0});
}

TEST_CASE("property: bank and reference stay aligned") {
  TrajectoryBank bank(3, 5);
  ReferenceTrajectory ref(5);
  for (std::size_t e = 1; e <= 12; ++e) {
    bank.record_epoch_losses(e, obs({{0, 1.0 * e}, {1, 2.0}, {2, 0.5}}));
    ref.push(0.1 * e);
    for (std::size_t i = 0; i < 3; ++i) CHECK(bank.read_window(i).size() == ref.read().size());
  }
}
