#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "trajprune/errors.hpp"
#include "trajprune/noise.hpp"

using namespace trajprune;

namespace {

Dataset balanced(std::size_t n, int C) {
  Dataset d;
  d.num_classes = C;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.id = s.source_id = i;
    s.features = {static_cast<double>(i), 1.0};
    s.noisy_label = s.true_label = static_cast<int>(i % static_cast<std::size_t>(C));
    d.samples.push_back(s);
  }
  return d;
}

std::size_t flips(const Dataset& d) { return d.flipped_count(); }

void check_untouched(const Dataset& clean, const Dataset& noisy) {
  REQUIRE(clean.size() == noisy.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    CHECK(noisy[i].true_label == clean[i].true_label);
    CHECK(noisy[i].features == clean[i].features);
    CHECK(noisy[i].id == clean[i].id);
    CHECK(noisy[i].is_flipped() == (noisy[i].noisy_label != noisy[i].true_label));
  }
}

}  // namespace

TEST_CASE("rate 0 is the identity for every injector") {
  const Dataset clean = balanced(100, 4);
  CHECK(flips(inject_symmetric_consecutive(clean, 0.0, 1)) == 0);
  CHECK(flips(inject_uniform_symmetric(clean, 0.0, 1)) == 0);
  CHECK(flips(inject_asymmetric_superclass(clean, 0.0, consecutive_superclasses(4, 2), 1)) == 0);
  CHECK(flips(inject_pairflip(clean, 0.0, 1)) == 0);
}

TEST_CASE("consecutive: last class wraps to class 0") {
  const Dataset noisy = inject_symmetric_consecutive(balanced(1000, 10), 0.2, 7);
  std::size_t wrapped = 0;
  for (const auto& s : noisy.samples) {
    if (!s.is_flipped()) continue;
    CHECK(s.noisy_label == (s.true_label + 1) % 10);
    if (s.true_label == 9) {
      CHECK(s.noisy_label == 0);
      ++wrapped;
    }
  }
  CHECK(wrapped == 20);
}

TEST_CASE("consecutive: exact per-class counts") {
  const Dataset noisy = inject_symmetric_consecutive(balanced(1000, 10), 0.5, 3);
  std::map<int, int> per_class;
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) ++per_class[s.true_label];
  REQUIRE(per_class.size() == 10);
  for (auto [c, k] : per_class) CHECK(k == 50);
}

TEST_CASE("consecutive: per-class rounding on unbalanced classes") {
  Dataset d = balanced(30, 3);
  for (std::size_t i = 0; i < 5; ++i) d.samples[i * 3].noisy_label = d.samples[i * 3].true_label = 1;
  // class 0 has 5 members, class 1 has 15, class 2 has 10
  const Dataset noisy = inject_symmetric_consecutive(d, 0.3, 1);
  std::map<int, int> per_class;
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) ++per_class[s.true_label];
  CHECK(per_class[0] == std::llround(0.3 * 5));
  CHECK(per_class[1] == std::llround(0.3 * 15));
  CHECK(per_class[2] == 3);
}

TEST_CASE("uniform: C = 2 behaves like the consecutive flip") {
  const Dataset noisy = inject_uniform_symmetric(balanced(200, 2), 0.3, 5);
  CHECK(flips(noisy) == 60);
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) CHECK(s.noisy_label == 1 - s.true_label);
}

TEST_CASE("uniform: exact count and chi-square uniformity of targets") {
  const Dataset clean = balanced(10000, 10);
  const Dataset noisy = inject_uniform_symmetric(clean, 0.4, 12);
  check_untouched(clean, noisy);
  CHECK(flips(noisy) == 4000);
  std::vector<double> offsets(10, 0.0);
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) offsets[static_cast<std::size_t>((s.noisy_label - s.true_label + 10) % 10)] += 1;
  CHECK(offsets[0] == 0.0);
  const double expected = 4000.0 / 9.0;
  double chi2 = 0.0;
  for (int k = 1; k < 10; ++k) chi2 += (offsets[k] - expected) * (offsets[k] - expected) / expected;
  CHECK(chi2 < 20.09);  // chi-square, 8 dof, p = 0.01
}

TEST_CASE("superclass: groups of two give the partner") {
  const auto groups = consecutive_superclasses(10, 2);
  const Dataset noisy = inject_asymmetric_superclass(balanced(1000, 10), 0.3, groups, 2);
  CHECK(flips(noisy) == 300);
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) CHECK(s.noisy_label == (s.true_label ^ 1));
}

TEST_CASE("superclass: every flip stays inside its group") {
  const SuperclassMap groups{0, 0, 0, 1, 1, 2, 2, 2, 2};
  const Dataset clean = balanced(900, 9);
  const Dataset noisy = inject_asymmetric_superclass(clean, 0.6, groups, 9);
  check_untouched(clean, noisy);
  CHECK(flips(noisy) == 540);
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) CHECK(groups[s.noisy_label] == groups[s.true_label]);
}

TEST_CASE("superclass map validation") {
  CHECK_THROWS_AS(NoiseSpec({NoiseKind::asymmetric_superclass, 0.2, SuperclassMap{0, 0, 1}}).validate(3), ConfigError);
  CHECK_THROWS_AS(NoiseSpec({NoiseKind::asymmetric_superclass, 0.2, SuperclassMap{0, 0}}).validate(3), ConfigError);
  CHECK_THROWS_AS(NoiseSpec({NoiseKind::asymmetric_superclass, 0.2, std::nullopt}).validate(3), ConfigError);
  CHECK_NOTHROW(NoiseSpec({NoiseKind::asymmetric_superclass, 0.2, SuperclassMap{1, 1, 1}}).validate(3));
  CHECK(consecutive_superclasses(5, 2) == SuperclassMap{0, 0, 1, 1, 1});
  CHECK(consecutive_superclasses(6, 3) == SuperclassMap{0, 0, 0, 1, 1, 1});
  CHECK_THROWS_AS(consecutive_superclasses(6, 1), ConfigError);
}

TEST_CASE("pairflip: 45% of each of seven classes moves to the next") {
  const Dataset noisy = inject_pairflip(balanced(700, 7), 0.45, 4);
  std::map<int, int> per_class;
  for (const auto& s : noisy.samples)
    if (s.is_flipped()) {
      CHECK(s.noisy_label == (s.true_label + 1) % 7);
      ++per_class[s.true_label];
    }
  for (int c = 0; c < 7; ++c) CHECK(per_class[c] == 45);
}

TEST_CASE("pairflip equals the consecutive flip element-wise") {
  const Dataset clean = balanced(500, 5);
  const Dataset a = inject_pairflip(clean, 0.35, 77);
  const Dataset b = inject_symmetric_consecutive(clean, 0.35, 77);
  for (std::size_t i = 0; i < clean.size(); ++i) CHECK(a[i].noisy_label == b[i].noisy_label);
}

TEST_CASE("rate outside [0, 1) and noisy inputs are rejected") {
  const Dataset clean = balanced(50, 5);
  CHECK_THROWS_AS(inject_symmetric_consecutive(clean, 1.0, 0), ConfigError);
  CHECK_THROWS_AS(inject_uniform_symmetric(clean, -0.1, 0), ConfigError);
  CHECK_THROWS_AS(inject_pairflip(clean, 1.5, 0), ConfigError);
  const Dataset noisy = inject_uniform_symmetric(clean, 0.2, 0);
  CHECK_THROWS_AS(inject_uniform_symmetric(noisy, 0.2, 0), ConfigError);
  CHECK_THROWS_AS(NoiseSpec({NoiseKind::none, 0.1, std::nullopt}).validate(5), ConfigError);
}

TEST_CASE("property: achieved flip fraction is round(rate * n) / n") {
  for (double rate : {0.05, 0.13, 0.2, 0.37, 0.5, 0.8, 0.99})
    for (std::size_t n : {10u, 77u, 1000u}) {
      const Dataset clean = balanced(n, 3);
      const auto want = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
      CHECK(flips(inject_uniform_symmetric(clean, rate, n)) == want);
      CHECK(flips(inject_asymmetric_superclass(clean, rate, SuperclassMap{0, 0, 0}, n)) == want);
    }
}

TEST_CASE("property: same seed replays the same flip set, different seeds differ") {
  const Dataset clean = balanced(400, 8);
  for (auto kind : {NoiseKind::symmetric_consecutive, NoiseKind::uniform_symmetric, NoiseKind::pairflip,
                    NoiseKind::asymmetric_superclass}) {
    NoiseSpec spec{kind, 0.3, std::nullopt};
    if (kind == NoiseKind::asymmetric_superclass) spec.superclass_map = consecutive_superclasses(8, 2);
    const Dataset a = apply_noise(clean, spec, 5), b = apply_noise(clean, spec, 5), c = apply_noise(clean, spec, 6);
    bool same = true, differs = false;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      same = same && a[i].noisy_label == b[i].noisy_label;
      differs = differs || a[i].noisy_label != c[i].noisy_label;
    }
    CHECK(same);
    CHECK(differs);
    check_untouched(clean, a);
  }
}

TEST_CASE("noise kind names round-trip") {
  for (auto k : {NoiseKind::none, NoiseKind::symmetric_consecutive, NoiseKind::uniform_symmetric,
                 NoiseKind::asymmetric_superclass, NoiseKind::pairflip})
    CHECK(noise_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(noise_kind_from_string("gaussian"), ConfigError);
}
