#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trajprune/config.hpp"
#include "trajprune/das.hpp"
#include "trajprune/dataset.hpp"
#include "trajprune/metrics.hpp"
#include "trajprune/model.hpp"
#include "trajprune/policy.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune {

/// Forward-pass budget matching a target prune ratio:
/// ceil((1 - ratio) * |D| * T_full) trained samples.
struct Budget {
  std::size_t full_pass_budget = 0;
  std::size_t consumed = 0;

  bool exhausted() const { return consumed >= full_pass_budget; }
};

Budget make_budget(double target_prune_ratio, std::size_t dataset_size, std::size_t full_epochs);

struct ProbeSettings {
  ArchSpec arch;
  std::size_t batch_size = 64;
  double lr = 0.1;
};

/// Splits the (noisy) training pool into (train, reference) per spec.
/// Throws ConfigError if either side would be empty.
std::pair<Dataset, Dataset> carve_reference(const Dataset& pool, const ReferenceSpec& spec,
                                            const ProbeSettings& probe, std::uint64_t seed);

/// Fraction of label-flipped samples among the plan's kept ids.
double retained_noise_ratio(const EpochPlan& plan, const Dataset& train);

/// One pass over the plan's kept samples in shuffled mini-batches. Returns
/// each trained sample's loss at its visit. Throws DivergenceError if a loss
/// exceeds 1e6 or is not finite.
std::vector<LossObservation> train_epoch(Model& model, const Dataset& train, const EpochPlan& plan,
                                         std::size_t batch_size, double lr, std::size_t epoch, Rng& rng);

struct RunData {
  Dataset train;
  Dataset reference;
  Dataset test;
};

/// Synthesize or load, inject noise, carve the reference set.
RunData prepare_data(const RunConfig& cfg, std::uint64_t seed);

struct EpochView {
  std::size_t epoch;
  const Model& model;
  const RunData& data;
  const TrajectoryBank& bank;
  const ReferenceTrajectory& reference;
  const EpochPlan& trained_plan;
  const EpochPlan& next_plan;
  const std::optional<DasScores>& das;
  const MetricsRecord& record;
};

struct RunHooks {
  std::function<void(const EpochView&)> on_epoch;
  bool collect_logs = false;  // keep trajectory and DAS logs in the result
};

struct RunResult {
  std::string run;
  std::uint64_t seed = 0;
  std::vector<MetricsRecord> records;
  bool failed = false;
  std::string error;
  Budget budget;
  bool stopped_by_budget = false;
  std::size_t train_size = 0;
  std::vector<SampleInfo> samples;
  std::vector<TrajectoryRecord> trajectory_log;
  std::vector<DasRecord> das_log;
};

/// The per-epoch loop: train on the current plan, record losses (carrying
/// forward pruned samples), record the reference loss, score, build the next
/// plan, emit metrics. Stops when the budget is spent or T is reached.
/// A diverging trainer yields a failed result instead of throwing.
RunResult run_experiment(const RunConfig& cfg, std::uint64_t seed, const RunHooks& hooks = {});

std::string run_directory(const RunConfig& cfg, std::uint64_t seed);

/// metrics.jsonl plus, when the config asks, trajectories.jsonl, das.jsonl
/// and samples.csv.
void write_run(const RunConfig& cfg, const RunResult& result, const std::string& dir);

/// Runs every seed of every config (concurrently), writes each run's
/// directory, then aggregate.csv and aggregate.jsonl under output_dir.
std::vector<RunResult> sweep(const std::vector<RunConfig>& configs, const std::string& output_dir);

}  // namespace trajprune
