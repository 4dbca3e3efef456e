#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "trajprune/dataset.hpp"

namespace trajprune {

enum class NoiseKind { none, symmetric_consecutive, uniform_symmetric, asymmetric_superclass, pairflip };

const char* to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

/// class -> group id
using SuperclassMap = std::vector<int>;

struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double rate = 0.0;
  std::optional<SuperclassMap> superclass_map;

  /// Throws ConfigError for rate outside [0, 1) or a map that misses a
  /// class or has a singleton group.
  void validate(int num_classes) const;
};

/// Consecutive classes grouped in blocks of group_size; a short tail block
/// is merged into the previous one so every group has at least two members.
SuperclassMap consecutive_superclasses(int num_classes, int group_size);

/// round(rate * n_c) samples of every class c move to (c + 1) mod C.
Dataset inject_symmetric_consecutive(const Dataset& clean, double rate, std::uint64_t seed);

/// round(rate * n) samples get a label drawn uniformly from the other C - 1 classes.
Dataset inject_uniform_symmetric(const Dataset& clean, double rate, std::uint64_t seed);

/// round(rate * n) samples get a label drawn uniformly from the other members
/// of their superclass.
Dataset inject_asymmetric_superclass(const Dataset& clean, double rate, const SuperclassMap& groups,
                                     std::uint64_t seed);

/// Alias of the consecutive-class flip under its conventional name.
Dataset inject_pairflip(const Dataset& clean, double rate, std::uint64_t seed);

Dataset apply_noise(const Dataset& clean, const NoiseSpec& spec, std::uint64_t seed);

}  // namespace trajprune
