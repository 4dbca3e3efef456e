#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "trajprune/rng.hpp"

namespace trajprune {

enum class PolicyKind { static_random, dynamic_random, infobatch, seta };
enum class ScoreSource { epoch_loss, das };

const char* to_string(PolicyKind p);  // seta is labelled "seta-simplified"
const char* to_string(ScoreSource s);
PolicyKind policy_kind_from_string(const std::string& s);
ScoreSource score_source_from_string(const std::string& s);

/// Which samples are pruning candidates: strictly below the mean score,
/// strictly below the q-quantile, or every sample.
struct Threshold {
  enum class Kind { mean, quantile, all };
  Kind kind = Kind::mean;
  double q = 0.5;
};

struct PolicyConfig {
  PolicyKind policy = PolicyKind::infobatch;
  ScoreSource score_source = ScoreSource::epoch_loss;
  double r = 0.5;        // per-epoch prune probability of a candidate
  double delta = 0.875;  // pruning stops after epoch ceil(delta * T)
  double seta_alpha = 0.9;
  int seta_k = 5;
  std::uint64_t seed = 0;
  Threshold threshold;
  bool rescale = true;  // weight kept candidates by 1/(1-r)

  void validate() const;
  /// The only weight other than 1.0 a plan may carry.
  double rescale_weight() const { return 1.0 / (1.0 - r); }
};

struct ScoreVector {
  std::vector<double> values;
  ScoreSource source = ScoreSource::epoch_loss;
};

/// Samples to train on in one epoch, sorted by id, with a gradient weight each.
struct EpochPlan {
  std::size_t epoch = 0;
  std::vector<std::size_t> kept_ids;
  std::vector<double> weights;  // parallel to kept_ids
  std::size_t pruned_count = 0;
  /// Trajectory epochs recorded when the scores behind this plan were taken
  /// (0 for plans built without scores).
  std::size_t scored_at_epoch = 0;
  ScoreSource score_source = ScoreSource::epoch_loss;

  std::size_t kept() const { return kept_ids.size(); }
  std::size_t total() const { return kept_ids.size() + pruned_count; }
  double pruned_fraction() const;
};

/// Keeps every sample with weight 1.
EpochPlan full_plan(std::size_t n, std::size_t epoch);

/// True while pruning is allowed, i.e. epoch <= ceil(delta * total_epochs).
bool pruning_active(std::size_t epoch, std::size_t total_epochs, double delta);

/// Mean-threshold dynamic pruning with expectation rescaling. The code path
/// does not depend on the score source; the source is recorded only.
EpochPlan infobatch_plan(const ScoreVector& scores, const PolicyConfig& cfg, std::size_t epoch,
                         std::size_t total_epochs, Rng& rng);

struct SetaState {
  std::size_t steps = 0;  // plans built so far; drives the window length
};

/// Simplified sliding-window policy: samples sorted by score are cut into k
/// groups; only the window of round(k * alpha^step) groups at the useful end
/// (high score for das, low loss for epoch_loss) is trained on, and window
/// members are pruned with probability r. r == 0 disables pruning entirely.
EpochPlan seta_plan(const ScoreVector& scores, const PolicyConfig& cfg, std::size_t epoch,
                    std::size_t total_epochs, SetaState& state, Rng& rng);

std::size_t seta_window_groups(int k, double alpha, std::size_t step);

/// Uniform subset of round(keep_fraction * n) ids, weights 1.
EpochPlan dynamic_random_plan(std::size_t n, double keep_fraction, std::size_t epoch, Rng& rng);

/// Sorted subset of round(keep_fraction * n) ids, drawn once per run.
std::vector<std::size_t> static_random_select(std::size_t n, double keep_fraction, Rng& rng);

EpochPlan plan_from_ids(std::vector<std::size_t> ids, std::size_t n, std::size_t epoch);

/// Throws InvariantError unless the plan partitions 0..n-1 and every weight
/// is exactly 1 or cfg.rescale_weight().
void check_plan(const EpochPlan& plan, std::size_t n, const PolicyConfig& cfg);

}  // namespace trajprune
