#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <vector>

#include "trajprune/metrics.hpp"

namespace trajprune {

/// Grouping key of an aggregate cell.
struct CellKey {
  std::string policy;
  std::string score_source;
  std::string noise_kind;
  double noise_rate = 0.0;
  double target_prune_ratio = 0.0;

  auto operator<=>(const CellKey&) const = default;
  std::string method() const { return policy + "+" + score_source; }
};

/// Sample statistics (n - 1 denominator; std is 0 for a single value).
struct Stat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

Stat summarize(const std::vector<double>& values);

struct AggregateCell {
  CellKey key;
  std::size_t runs = 0;
  std::size_t failed = 0;
  Stat test_acc;
  Stat retained_noise_ratio;
  Stat pruned_fraction;
  Stat mean_das;
  Stat consumed_forward_passes;
  Stat epochs;
};

/// Groups terminal records by CellKey; failed runs count toward `failed`
/// and contribute no values.
std::vector<AggregateCell> aggregate(const std::vector<MetricsRecord>& terminal_records);

/// Terminal record of every metrics.jsonl found under dir (recursively).
std::vector<MetricsRecord> read_terminal_records(const std::string& dir);

void write_aggregate_csv(const std::string& path, const std::vector<AggregateCell>& cells);
void write_aggregate_jsonl(const std::string& path, const std::vector<AggregateCell>& cells);

struct ComparisonCell {
  std::string method;  // policy+score_source
  std::string noise_kind;
  double noise_rate = 0.0;
  double target_prune_ratio = 0.0;
  double mean_acc = 0.0;
  double std_acc = 0.0;
  double gap_vs_full = 0.0;
};

struct MeanGapRow {
  std::string method;
  double target_prune_ratio = 0.0;
  double mean_gap = 0.0;
  std::size_t conditions = 0;
};

struct GapTable {
  std::vector<ComparisonCell> cells;
  std::vector<MeanGapRow> mean_rows;
};

/// Gap of every cell to the full-training accuracy of its noise condition,
/// plus the mean gap per (method, prune ratio). Throws ConfigError naming
/// the first noise condition without a full-training cell.
GapTable build_gap_table(const std::vector<AggregateCell>& cells, const std::vector<AggregateCell>& full_training);

void write_gap_table_csv(const std::string& path, const GapTable& table);

struct HardNoisyRow {
  std::size_t epoch = 0;
  double hard_clean_loss = 0.0;
  double hard_clean_das = 0.0;  // NaN when no DAS exists for the epoch
  double flipped_loss = 0.0;
  double flipped_das = 0.0;
};

struct HardNoisySeries {
  std::vector<std::size_t> hard_clean_ids;
  std::vector<std::size_t> flipped_ids;
  std::vector<HardNoisyRow> rows;
};

/// Per-epoch mean loss and DAS of (a) the top_percent of clean samples by
/// average recorded loss and (b) all flipped samples. Throws ConfigError when
/// there are no flipped samples.
HardNoisySeries hard_vs_noisy_export(const std::vector<TrajectoryRecord>& trajectories,
                                     const std::vector<DasRecord>& das, const std::vector<SampleInfo>& samples,
                                     double top_percent);

void write_hard_vs_noisy_csv(const std::string& path, const HardNoisySeries& series);

}  // namespace trajprune
