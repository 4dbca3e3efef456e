#pragma once

#include <cstddef>
#include <vector>

#include "trajprune/correlation.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune {

/// Alignment of every training sample's loss window with the reference
/// window at one epoch. Scores lie in [-1, 1]; higher means the sample's
/// loss moves with the clean reference loss.
struct DasScores {
  std::size_t epoch = 0;
  std::vector<double> scores;
  Correlation kind = Correlation::pearson;

  double mean() const;
};

enum class Execution { serial, parallel };

/// Scores all samples against the reference. Throws ConfigError when the
/// bank and reference read-outs differ in length.
DasScores compute_das_all(const TrajectoryBank& bank, const ReferenceTrajectory& ref, Correlation kind,
                          Execution exec = Execution::parallel);

}  // namespace trajprune
