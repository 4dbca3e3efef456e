#include "trajprune/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajprune/errors.hpp"

namespace trajprune {

namespace {

void check_rate(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("noise rate must lie in [0, 1)");
}

void check_clean(const Dataset& d) {
  if (!d.is_clean()) throw ConfigError("noise injection expects a clean dataset");
}

std::size_t flip_count(double rate, std::size_t n) {
  return static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
}

// First k entries of a seeded permutation of `pool`.
std::vector<std::size_t> choose(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

std::vector<std::size_t> all_ids(const Dataset& d) {
  std::vector<std::size_t> ids(d.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  return ids;
}

}  // namespace

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::symmetric_consecutive: return "symmetric_consecutive";
    case NoiseKind::uniform_symmetric: return "uniform_symmetric";
    case NoiseKind::asymmetric_superclass: return "asymmetric_superclass";
    case NoiseKind::pairflip: return "pairflip";
  }
  return "?";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  for (auto k : {NoiseKind::none, NoiseKind::symmetric_consecutive, NoiseKind::uniform_symmetric,
                 NoiseKind::asymmetric_superclass, NoiseKind::pairflip})
    if (s == to_string(k)) return k;
  throw ConfigError("unknown noise kind: " + s);
}

void NoiseSpec::validate(int num_classes) const {
  check_rate(rate);
  if (kind == NoiseKind::none && rate != 0.0) throw ConfigError("noise kind 'none' requires rate 0");
  if (kind == NoiseKind::asymmetric_superclass && !superclass_map)
    throw ConfigError("asymmetric_superclass noise requires a superclass map");
  if (!superclass_map) return;
  const auto& map = *superclass_map;
  if (map.size() != static_cast<std::size_t>(num_classes))
    throw ConfigError("superclass map must cover all " + std::to_string(num_classes) + " classes");
  std::vector<int> sizes;
  for (int g : map) {
    if (g < 0) throw ConfigError("superclass ids must be nonnegative");
    if (static_cast<std::size_t>(g) >= sizes.size()) sizes.resize(static_cast<std::size_t>(g) + 1, 0);
    ++sizes[static_cast<std::size_t>(g)];
  }
  for (std::size_t g = 0; g < sizes.size(); ++g)
    if (sizes[g] == 1) throw ConfigError("superclass group " + std::to_string(g) + " has a single member");
}

SuperclassMap consecutive_superclasses(int num_classes, int group_size) {
  if (group_size < 2 || num_classes < 2) throw ConfigError("superclass groups need at least two classes");
  SuperclassMap map(static_cast<std::size_t>(num_classes));
  const int full_groups = std::max(1, num_classes / group_size);
  for (int c = 0; c < num_classes; ++c) map[static_cast<std::size_t>(c)] = std::min(c / group_size, full_groups - 1);
  return map;
}

Dataset inject_symmetric_consecutive(const Dataset& clean, double rate, std::uint64_t seed) {
  check_rate(rate);
  check_clean(clean);
  Rng rng = make_stream(seed, "noise/consecutive");
  Dataset out = clean;
  const int C = clean.num_classes;
  for (int c = 0; c < C; ++c) {
    std::vector<std::size_t> members;
    for (const auto& s : clean.samples)
      if (s.true_label == c) members.push_back(s.id);
    for (std::size_t id : choose(members, flip_count(rate, members.size()), rng))
      out.samples[id].noisy_label = (c + 1) % C;
  }
  return out;
}

Dataset inject_uniform_symmetric(const Dataset& clean, double rate, std::uint64_t seed) {
  check_rate(rate);
  check_clean(clean);
  Rng rng = make_stream(seed, "noise/uniform");
  Dataset out = clean;
  const int C = clean.num_classes;
  std::uniform_int_distribution<int> other(1, C - 1);
  for (std::size_t id : choose(all_ids(clean), flip_count(rate, clean.size()), rng)) {
    auto& s = out.samples[id];
    s.noisy_label = (s.true_label + other(rng)) % C;
  }
  return out;
}

Dataset inject_asymmetric_superclass(const Dataset& clean, double rate, const SuperclassMap& groups,
                                     std::uint64_t seed) {
  NoiseSpec{NoiseKind::asymmetric_superclass, rate, groups}.validate(clean.num_classes);
  check_clean(clean);
  Rng rng = make_stream(seed, "noise/superclass");
  Dataset out = clean;
  for (std::size_t id : choose(all_ids(clean), flip_count(rate, clean.size()), rng)) {
    auto& s = out.samples[id];
    const int group = groups[static_cast<std::size_t>(s.true_label)];
    std::vector<int> partners;
    for (int c = 0; c < clean.num_classes; ++c)
      if (c != s.true_label && groups[static_cast<std::size_t>(c)] == group) partners.push_back(c);
    std::uniform_int_distribution<std::size_t> pick(0, partners.size() - 1);
    s.noisy_label = partners[pick(rng)];
  }
  return out;
}

Dataset inject_pairflip(const Dataset& clean, double rate, std::uint64_t seed) {
  return inject_symmetric_consecutive(clean, rate, seed);
}

Dataset apply_noise(const Dataset& clean, const NoiseSpec& spec, std::uint64_t seed) {
  spec.validate(clean.num_classes);
  switch (spec.kind) {
    case NoiseKind::none: return clean;
    case NoiseKind::symmetric_consecutive: return inject_symmetric_consecutive(clean, spec.rate, seed);
    case NoiseKind::uniform_symmetric: return inject_uniform_symmetric(clean, spec.rate, seed);
    case NoiseKind::asymmetric_superclass:
      return inject_asymmetric_superclass(clean, spec.rate, *spec.superclass_map, seed);
    case NoiseKind::pairflip: return inject_pairflip(clean, spec.rate, seed);
  }
  return clean;
}

}  // namespace trajprune
