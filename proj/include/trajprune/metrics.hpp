#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace trajprune {

/// Rounds to 6 significant digits, the precision of every number written
/// to run outputs.
double round_sig6(double v);

/// One line of a run's metrics.jsonl.
struct MetricsRecord {
  std::string run;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;
  std::string policy;
  std::string score_source;         // configured source
  std::string active_score_source;  // source that built the plan trained this epoch
  std::string noise_kind;
  double noise_rate = 0.0;
  double target_prune_ratio = 0.0;
  double test_acc_true_labels = 0.0;
  double retained_noise_ratio = 0.0;
  double pruned_fraction = 0.0;
  std::optional<double> mean_das;
  std::size_t consumed_forward_passes = 0;
  std::size_t full_pass_budget = 0;
  double wall_ms = 0.0;
  bool terminal = false;
  std::string status = "ok";  // "ok" or "failed"
  std::string error;
};

nlohmann::json to_json(const MetricsRecord& r);
MetricsRecord metrics_from_json(const nlohmann::json& j);

struct TrajectoryRecord {
  std::size_t epoch = 0;
  std::size_t id = 0;
  double loss = 0.0;
  bool carried = false;
};

struct DasRecord {
  std::size_t epoch = 0;
  std::size_t id = 0;
  double das = 0.0;
};

/// Label facts about one training sample, written next to the dumps.
struct SampleInfo {
  std::size_t id = 0;
  int noisy_label = 0;
  int true_label = 0;
  bool flipped() const { return noisy_label != true_label; }
};

void write_metrics_jsonl(const std::string& path, const std::vector<MetricsRecord>& records);
std::vector<MetricsRecord> read_metrics_jsonl(const std::string& path);

void write_trajectory_jsonl(const std::string& path, const std::vector<TrajectoryRecord>& records);
std::vector<TrajectoryRecord> read_trajectory_jsonl(const std::string& path);

void write_das_jsonl(const std::string& path, const std::vector<DasRecord>& records);
std::vector<DasRecord> read_das_jsonl(const std::string& path);

void write_samples_csv(const std::string& path, const std::vector<SampleInfo>& samples);
std::vector<SampleInfo> read_samples_csv(const std::string& path);

/// "%.6g" formatting shared by CSV writers.
std::string format_sig6(double v);

}  // namespace trajprune
