#include "trajprune/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajprune/errors.hpp"

namespace trajprune {

namespace {

double threshold_value(const std::vector<double>& v, const Threshold& t) {
  switch (t.kind) {
    case Threshold::Kind::mean: {
      double s = 0.0;
      for (double x : v) s += x;
      return s / static_cast<double>(v.size());
    }
    case Threshold::Kind::quantile: {
      std::vector<double> sorted = v;
      std::sort(sorted.begin(), sorted.end());
      const double pos = t.q * static_cast<double>(sorted.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, sorted.size() - 1);
      return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    }
    case Threshold::Kind::all: return 0.0;
  }
  return 0.0;
}

void check_scores(const ScoreVector& scores) {
  if (scores.values.empty()) throw ConfigError("policy: empty score vector");
  for (double v : scores.values)
    if (!std::isfinite(v)) throw ConfigError("policy: non-finite score");
}

// Shared pruning step: every candidate, in id order, is dropped with
// probability r; surviving candidates carry the rescale weight.
EpochPlan prune_candidates(const std::vector<char>& candidate, const std::vector<char>& excluded,
                           const PolicyConfig& cfg, std::size_t epoch, Rng& rng) {
  const std::size_t n = candidate.size();
  const double up = cfg.rescale ? cfg.rescale_weight() : 1.0;
  EpochPlan plan;
  plan.epoch = epoch;
  plan.kept_ids.reserve(n);
  plan.weights.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!excluded.empty() && excluded[i]) {
      ++plan.pruned_count;
      continue;
    }
    if (!candidate[i]) {
      plan.kept_ids.push_back(i);
      plan.weights.push_back(1.0);
      continue;
    }
    if (uniform01(rng) < cfg.r) {
      ++plan.pruned_count;
    } else {
      plan.kept_ids.push_back(i);
      plan.weights.push_back(up);
    }
  }
  return plan;
}

std::size_t exact_count(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
}

}  // namespace

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::static_random: return "static_random";
    case PolicyKind::dynamic_random: return "dynamic_random";
    case PolicyKind::infobatch: return "infobatch";
    case PolicyKind::seta: return "seta-simplified";
  }
  return "?";
}

const char* to_string(ScoreSource s) { return s == ScoreSource::das ? "das" : "epoch_loss"; }

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "static_random") return PolicyKind::static_random;
  if (s == "dynamic_random") return PolicyKind::dynamic_random;
  if (s == "infobatch") return PolicyKind::infobatch;
  if (s == "seta" || s == "seta-simplified") return PolicyKind::seta;
  throw ConfigError("unknown policy: " + s);
}

ScoreSource score_source_from_string(const std::string& s) {
  if (s == "epoch_loss") return ScoreSource::epoch_loss;
  if (s == "das") return ScoreSource::das;
  throw ConfigError("unknown score source: " + s);
}

void PolicyConfig::validate() const {
  if (!(r >= 0.0 && r < 1.0)) throw ConfigError("policy: r must lie in [0, 1)");
  if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("policy: delta must lie in (0, 1]");
  if (policy == PolicyKind::seta) {
    if (seta_k < 1) throw ConfigError("policy: seta_k must be at least 1");
    if (!(seta_alpha > 0.0 && seta_alpha <= 1.0)) throw ConfigError("policy: seta_alpha must lie in (0, 1]");
  }
  if (threshold.kind == Threshold::Kind::quantile && !(threshold.q >= 0.0 && threshold.q <= 1.0))
    throw ConfigError("policy: threshold quantile must lie in [0, 1]");
}

double EpochPlan::pruned_fraction() const {
  return total() == 0 ? 0.0 : static_cast<double>(pruned_count) / static_cast<double>(total());
}

EpochPlan full_plan(std::size_t n, std::size_t epoch) {
  EpochPlan plan;
  plan.epoch = epoch;
  plan.kept_ids.resize(n);
  std::iota(plan.kept_ids.begin(), plan.kept_ids.end(), std::size_t{0});
  plan.weights.assign(n, 1.0);
  return plan;
}

bool pruning_active(std::size_t epoch, std::size_t total_epochs, double delta) {
  const auto last = static_cast<std::size_t>(std::ceil(delta * static_cast<double>(total_epochs)));
  return epoch <= last;
}

EpochPlan infobatch_plan(const ScoreVector& scores, const PolicyConfig& cfg, std::size_t epoch,
                         std::size_t total_epochs, Rng& rng) {
  cfg.validate();
  check_scores(scores);
  const std::size_t n = scores.values.size();
  EpochPlan plan;
  if (cfg.r == 0.0 || !pruning_active(epoch, total_epochs, cfg.delta)) {
    plan = full_plan(n, epoch);
  } else {
    const double t = threshold_value(scores.values, cfg.threshold);
    std::vector<char> candidate(n);
    for (std::size_t i = 0; i < n; ++i)
      candidate[i] = cfg.threshold.kind == Threshold::Kind::all || scores.values[i] < t;
    plan = prune_candidates(candidate, {}, cfg, epoch, rng);
  }
  plan.score_source = scores.source;
  return plan;
}

std::size_t seta_window_groups(int k, double alpha, std::size_t step) {
  const double len = static_cast<double>(k) * std::pow(alpha, static_cast<double>(step));
  return static_cast<std::size_t>(std::clamp<long long>(std::llround(len), 1, k));
}

EpochPlan seta_plan(const ScoreVector& scores, const PolicyConfig& cfg, std::size_t epoch,
                    std::size_t total_epochs, SetaState& state, Rng& rng) {
  cfg.validate();
  check_scores(scores);
  const std::size_t n = scores.values.size();
  EpochPlan plan;
  if (cfg.r == 0.0 || !pruning_active(epoch, total_epochs, cfg.delta)) {
    plan = full_plan(n, epoch);
  } else {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores.values[a] < scores.values[b]; });

    const auto k = static_cast<std::size_t>(cfg.seta_k);
    const std::size_t groups = seta_window_groups(cfg.seta_k, cfg.seta_alpha, state.steps);
    // group g holds sorted positions [g*n/k, (g+1)*n/k)
    auto boundary = [&](std::size_t g) { return g * n / k; };
    std::size_t lo, hi;
    if (scores.source == ScoreSource::das) {
      lo = boundary(k - groups);
      hi = n;
    } else {
      lo = 0;
      hi = boundary(groups);
    }
    std::vector<char> excluded(n, 1);
    for (std::size_t p = lo; p < hi; ++p) excluded[order[p]] = 0;
    plan = prune_candidates(std::vector<char>(n, 1), excluded, cfg, epoch, rng);
  }
  ++state.steps;
  plan.score_source = scores.source;
  return plan;
}

EpochPlan plan_from_ids(std::vector<std::size_t> ids, std::size_t n, std::size_t epoch) {
  std::sort(ids.begin(), ids.end());
  EpochPlan plan;
  plan.epoch = epoch;
  plan.weights.assign(ids.size(), 1.0);
  plan.pruned_count = n - ids.size();
  plan.kept_ids = std::move(ids);
  return plan;
}

std::vector<std::size_t> static_random_select(std::size_t n, double keep_fraction, Rng& rng) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("keep_fraction must lie in (0, 1]");
  std::vector<std::size_t> ids(n);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  const std::size_t k = exact_count(n, keep_fraction);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

EpochPlan dynamic_random_plan(std::size_t n, double keep_fraction, std::size_t epoch, Rng& rng) {
  return plan_from_ids(static_random_select(n, keep_fraction, rng), n, epoch);
}

void check_plan(const EpochPlan& plan, std::size_t n, const PolicyConfig& cfg) {
  if (plan.kept_ids.size() != plan.weights.size()) throw InvariantError("plan: ids and weights differ in length");
  if (plan.kept_ids.size() + plan.pruned_count != n) throw InvariantError("plan: kept + pruned != dataset size");
  for (std::size_t k = 0; k < plan.kept_ids.size(); ++k) {
    if (plan.kept_ids[k] >= n) throw InvariantError("plan: id out of range");
    if (k > 0 && plan.kept_ids[k] <= plan.kept_ids[k - 1]) throw InvariantError("plan: ids not strictly increasing");
    const double w = plan.weights[k];
    if (w != 1.0 && w != cfg.rescale_weight())
      throw InvariantError("plan: weight " + std::to_string(w) + " is neither 1 nor 1/(1-r)");
  }
}

}  // namespace trajprune
