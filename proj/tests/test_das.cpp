#include <cmath>
#include <vector>

#include "doctest.h"
#include "synthetic.hpp"
#include "trajprune/das.hpp"
#include "trajprune/errors.hpp"

using namespace trajprune;
using V = std::vector<double>;

namespace {

// Textbook two-pass formulas, long double accumulation.
double oracle_pearson(const V& a, const V& b) {
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  long double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(cov / std::sqrt(va * vb));
}

double oracle_cosine(const V& a, const V& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

V random_vec(std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  const double s = scale(rng), shift = g(rng) * 10;
  V v(n);
  for (double& x : v) x = shift + s * g(rng);
  return v;
}

void fill_bank(TrajectoryBank& bank, ReferenceTrajectory& ref, const std::vector<V>& rows, const V& reference) {
  for (std::size_t e = 0; e < reference.size(); ++e) {
    std::vector<LossObservation> obs;
    for (std::size_t i = 0; i < rows.size(); ++i) obs.push_back({i, rows[i][e]});
    bank.record_epoch_losses(e + 1, obs);
    ref.push(reference[e]);
  }
}

}  // namespace

TEST_CASE("pearson examples") {
  CHECK(pearson(V{3, 2, 1}, V{6, 4, 2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson(V{1, 2, 3}, V{3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson(V{5, 5, 5}, V{1, 7, 2}) == 0.0);
  CHECK(pearson(V{1, 7, 2}, V{5, 5, 5}) == 0.0);
  CHECK(pearson(V{4}, V{2}) == 0.0);
}

TEST_CASE("cosine examples") {
  CHECK(cosine(V{1, 2}, V{1, 2}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(cosine(V{1, 0}, V{0, 1}) == 0.0);
  CHECK(cosine(V{0, 0}, V{3, 1}) == 0.0);
  CHECK(cosine(V{2, 2}, V{-1, -1}) == doctest::Approx(-1.0));
}

TEST_CASE("length mismatch and empty input are errors") {
  CHECK_THROWS_AS(pearson(V{1, 2}, V{1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(pearson(V{}, V{}), ConfigError);
  CHECK_THROWS_AS(cosine(V{1}, V{}), ConfigError);
  CHECK_THROWS_AS(correlation_from_string("spearman"), ConfigError);
}

TEST_CASE("random pairs match two-pass oracles") {
  Rng rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const V a = random_vec(25, rng), b = random_vec(25, rng);
    const double p = pearson(a, b), c = cosine(a, b);
    CHECK(std::abs(p - oracle_pearson(a, b)) <= 1e-10);
    CHECK(std::abs(c - oracle_cosine(a, b)) <= 1e-10);
    CHECK(std::abs(p) <= 1.0);
    CHECK(std::abs(c) <= 1.0);
  }
}

TEST_CASE("property: pearson is invariant to positive affine maps and flips under negative scale") {
  Rng rng(7);
  std::uniform_real_distribution<double> u(0.1, 50.0), shift(-100.0, 100.0);
  for (int t = 0; t < 500; ++t) {
    const V a = random_vec(12, rng), b = random_vec(12, rng);
    const double alpha = u(rng), beta = shift(rng);
    V pos(a), neg(a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      pos[i] = alpha * a[i] + beta;
      neg[i] = -alpha * a[i] + beta;
    }
    const double base = pearson(a, b);
    CHECK(pearson(pos, b) == doctest::Approx(base).epsilon(1e-9));
    CHECK(pearson(neg, b) == doctest::Approx(-base).epsilon(1e-9));
  }
}

TEST_CASE("property: symmetry and bounds") {
  Rng rng(8);
  for (int t = 0; t < 500; ++t) {
    const V a = random_vec(1 + t % 30, rng), b = random_vec(1 + t % 30, rng);
    CHECK(pearson(a, b) == doctest::Approx(pearson(b, a)).epsilon(1e-12));
    CHECK(cosine(a, b) == doctest::Approx(cosine(b, a)).epsilon(1e-12));
    CHECK(std::abs(pearson(a, b)) <= 1.0);
    CHECK(std::abs(cosine(a, b)) <= 1.0);
    CHECK(pearson(a, a) == doctest::Approx(a.size() > 1 ? 1.0 : 0.0));
  }
  // values that drift past 1 without clamping
  const V big{1e15, 1e15 + 2, 1e15 + 4};
  CHECK(pearson(big, big) <= 1.0);
  CHECK(pearson(big, V{1, 2, 3}) <= 1.0);
}

TEST_CASE("property: co-moving trajectories score positive, random walks average zero") {
  Rng rng(99);
  int positive = 0;
  double walk_sum = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    const V ref = synthetic::reference_curve(10, rng);
    positive += pearson(synthetic::hard_clean(ref, rng), ref) > 0.0;
    walk_sum += pearson(synthetic::random_walk(10, rng), synthetic::random_walk(10, rng));
  }
  CHECK(positive >= 0.99 * draws);
  CHECK(std::abs(walk_sum / draws) < 0.1);
}

TEST_CASE("compute_das_all: copies of the reference score 1, reversed scores -1") {
  const V reference{2.3, 1.9, 1.4, 1.2, 1.1};
  V reversed(reference.rbegin(), reference.rend());
  TrajectoryBank bank(3, 5);
  ReferenceTrajectory ref(5);
  fill_bank(bank, ref, {reference, reference, reversed}, reference);
  for (auto exec : {Execution::serial, Execution::parallel}) {
    const DasScores s = compute_das_all(bank, ref, Correlation::pearson, exec);
    CHECK(s.scores[0] == doctest::Approx(1.0));
    CHECK(s.scores[1] == doctest::Approx(1.0));
    CHECK(s.scores[2] == doctest::Approx(pearson(reversed, reference)));
    CHECK(s.epoch == 5);
  }
  TrajectoryBank b2(1, 3);
  ReferenceTrajectory r2(3);
  fill_bank(b2, r2, {V{3, 2, 1}}, V{1, 2, 3});
  CHECK(compute_das_all(b2, r2, Correlation::pearson).scores[0] == doctest::Approx(-1.0));
}

TEST_CASE("compute_das_all equals a per-sample loop") {
  Rng rng(31);
  const std::size_t n = 200, N = 7;
  for (std::size_t epochs : {3u, 7u, 19u}) {
    TrajectoryBank bank(n, N);
    ReferenceTrajectory ref(N);
    for (std::size_t e = 1; e <= epochs; ++e) {
      std::vector<LossObservation> obs;
      for (std::size_t i = 0; i < n; ++i)
        if (e == 1 || uniform01(rng) < 0.7) obs.push_back({i, uniform01(rng) * 3});
      bank.record_epoch_losses(e, obs);
      ref.push(uniform01(rng));
    }
    for (auto kind : {Correlation::pearson, Correlation::cosine}) {
      const auto all = compute_das_all(bank, ref, kind, Execution::parallel);
      REQUIRE(all.scores.size() == n);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::abs(all.scores[i] - correlate(kind, bank.read_window(i), ref.read())) <= 1e-12);
        CHECK(std::abs(all.scores[i]) <= 1.0);
      }
    }
  }
}

TEST_CASE("compute_das_all rejects misaligned inputs") {
  TrajectoryBank bank(1, 4);
  ReferenceTrajectory ref(4);
  bank.record_epoch_losses(1, std::vector<LossObservation>{{0, 1.0}});
  bank.record_epoch_losses(2, std::vector<LossObservation>{{0, 0.5}});
  ref.push(1.0);
  CHECK_THROWS_AS(compute_das_all(bank, ref, Correlation::pearson), ConfigError);
  CHECK_THROWS_AS(compute_das_all(bank, ref, Correlation::pearson, Execution::serial), ConfigError);
}

TEST_CASE("prepared reference agrees with the free functions") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const V a = random_vec(9, rng), b = random_vec(9, rng);
    CHECK(PreparedReference(Correlation::pearson, b).score(a) == pearson(a, b));
    CHECK(PreparedReference(Correlation::cosine, b).score(a) == cosine(a, b));
  }
}
