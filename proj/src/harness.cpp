#include "trajprune/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>

#include "trajprune/errors.hpp"
#include "trajprune/kernels.hpp"
#include "trajprune/noise.hpp"
#include "trajprune/report.hpp"

namespace trajprune {

namespace fs = std::filesystem;

namespace {

constexpr double kMaxLoss = 1e6;

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) { return make_stream(seed, tag)(); }

Dataset restore_true_labels(Dataset d) {
  for (auto& s : d.samples) s.noisy_label = s.true_label;
  return d;
}

std::vector<std::size_t> ids_not_in(const EpochPlan& plan, std::size_t n) {
  std::vector<char> kept(n, 0);
  for (std::size_t id : plan.kept_ids) kept[id] = 1;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!kept[i]) out.push_back(i);
  return out;
}

bool prunes_by_score(PolicyKind p) { return p == PolicyKind::infobatch || p == PolicyKind::seta; }

class PlanBuilder {
 public:
  PlanBuilder(const PolicyConfig& cfg, std::size_t n, std::size_t total_epochs, std::uint64_t seed)
      : cfg_(cfg), n_(n), total_(total_epochs),
        rng_(make_stream(seed ^ (cfg.seed * 0x9e3779b97f4a7c15ULL), "policy")) {
    if (cfg_.policy == PolicyKind::static_random) static_ids_ = static_random_select(n_, 1.0 - cfg_.r, rng_);
  }

  EpochPlan first() {
    switch (cfg_.policy) {
      case PolicyKind::static_random: return plan_from_ids(static_ids_, n_, 1);
      case PolicyKind::dynamic_random: return dynamic_random_plan(n_, 1.0 - cfg_.r, 1, rng_);
      default: return full_plan(n_, 1);
    }
  }

  EpochPlan next(const ScoreVector& scores, std::size_t epoch) {
    switch (cfg_.policy) {
      case PolicyKind::static_random: return plan_from_ids(static_ids_, n_, epoch);
      case PolicyKind::dynamic_random: return dynamic_random_plan(n_, 1.0 - cfg_.r, epoch, rng_);
      case PolicyKind::infobatch: return infobatch_plan(scores, cfg_, epoch, total_, rng_);
      case PolicyKind::seta: return seta_plan(scores, cfg_, epoch, total_, seta_, rng_);
    }
    throw ConfigError("unknown policy");
  }

 private:
  PolicyConfig cfg_;
  std::size_t n_;
  std::size_t total_;
  Rng rng_;
  SetaState seta_;
  std::vector<std::size_t> static_ids_;
};

void check_disjoint(const Dataset& train, const Dataset& reference) {
  std::set<std::size_t> ref_ids;
  for (const auto& s : reference.samples) ref_ids.insert(s.source_id);
  for (const auto& s : train.samples)
    if (ref_ids.count(s.source_id)) throw InvariantError("reference sample also present in the training set");
}

}  // namespace

Budget make_budget(double target_prune_ratio, std::size_t dataset_size, std::size_t full_epochs) {
  if (!(target_prune_ratio >= 0.0 && target_prune_ratio < 1.0))
    throw ConfigError("target_prune_ratio must lie in [0, 1)");
  const double exact = (1.0 - target_prune_ratio) * static_cast<double>(dataset_size) * static_cast<double>(full_epochs);
  // 1e-9 absorbs representation error in the ratio (0.7 * 1000 * 100 = 70000.000000001).
  return Budget{static_cast<std::size_t>(std::ceil(exact - 1e-9)), 0};
}

std::pair<Dataset, Dataset> carve_reference(const Dataset& pool, const ReferenceSpec& spec,
                                            const ProbeSettings& probe, std::uint64_t seed) {
  const auto held = static_cast<std::size_t>(std::llround(spec.fraction * static_cast<double>(pool.size())));
  if (held == 0) throw ConfigError("reference set would be empty");
  if (held >= pool.size()) throw ConfigError("reference set would leave the training set empty");
  Rng rng = make_stream(seed, "reference");

  switch (spec.kind) {
    case ReferenceSpec::Kind::held_out_clean: {
      auto [train, ref] = random_split(pool, spec.fraction, Split::train, Split::reference, rng);
      return {std::move(train), restore_true_labels(std::move(ref))};
    }
    case ReferenceSpec::Kind::noisy_random:
      return random_split(pool, spec.fraction, Split::train, Split::reference, rng);
    case ReferenceSpec::Kind::reference_noise: {
      auto [train, ref] = random_split(pool, spec.fraction, Split::train, Split::reference, rng);
      ref = inject_uniform_symmetric(restore_true_labels(std::move(ref)), spec.rate, derive_seed(seed, "reference/noise"));
      return {std::move(train), std::move(ref)};
    }
    case ReferenceSpec::Kind::pseudo_small_loss: {
      Rng init = make_stream(seed, "reference/probe-init");
      Model model = Model::initialized(probe.arch, pool.dim(), static_cast<std::size_t>(pool.num_classes), init);
      const EpochPlan all = full_plan(pool.size(), 1);
      for (std::size_t e = 1; e <= spec.probe_epochs; ++e)
        train_epoch(model, pool, all, probe.batch_size, probe.lr, e, rng);
      std::vector<double> losses(pool.size());
      kernels::parallel::dataset_losses(model, pool, losses);
      std::vector<std::size_t> order(pool.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return losses[a] < losses[b]; });
      std::vector<char> in_ref(pool.size(), 0);
      for (std::size_t k = 0; k < held; ++k) in_ref[order[k]] = 1;
      std::vector<Sample> train, ref;
      for (const auto& s : pool.samples) (in_ref[s.id] ? ref : train).push_back(s);
      return {make_split(std::move(train), pool.num_classes, Split::train),
              make_split(std::move(ref), pool.num_classes, Split::reference)};
    }
  }
  throw ConfigError("unknown reference kind");
}

double retained_noise_ratio(const EpochPlan& plan, const Dataset& train) {
  if (plan.kept_ids.empty()) throw ConfigError("retained noise ratio of an empty plan");
  std::size_t flipped = 0;
  for (std::size_t id : plan.kept_ids) {
    if (id >= train.size()) throw ConfigError("plan id out of range");
    if (train.samples[id].is_flipped()) ++flipped;
  }
  return static_cast<double>(flipped) / static_cast<double>(plan.kept_ids.size());
}

std::vector<LossObservation> train_epoch(Model& model, const Dataset& train, const EpochPlan& plan,
                                         std::size_t batch_size, double lr, std::size_t epoch, Rng& rng) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  std::vector<std::size_t> order(plan.kept_ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<LossObservation> observed;
  observed.reserve(order.size());
  std::vector<WeightedSample> batch;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    batch.clear();
    for (std::size_t k = start; k < end; ++k)
      batch.push_back({&train.samples.at(plan.kept_ids[order[k]]), plan.weights[order[k]]});
    std::vector<double> losses;
    try {
      losses = weighted_sgd_step(model, batch, lr);
    } catch (const DivergenceError& e) {
      throw DivergenceError(e.what(), epoch);
    }
    for (std::size_t k = 0; k < batch.size(); ++k) {
      if (!std::isfinite(losses[k]) || losses[k] > kMaxLoss)
        throw DivergenceError("training loss diverged", epoch);
      observed.push_back({batch[k].sample->id, losses[k]});
    }
  }
  if (!model.all_finite()) throw DivergenceError("non-finite parameters", epoch);
  return observed;
}

RunData prepare_data(const RunConfig& cfg, std::uint64_t seed) {
  RunData data;
  Dataset pool;
  const auto& ds = cfg.dataset;
  Rng rng = make_stream(ds.seed.value_or(seed), "data");
  if (ds.kind == DatasetSpec::Kind::blobs) {
    BlobGenerator gen(ds.d, ds.classes, ds.cluster_std, ds.center_scale, rng);
    pool = gen.sample(ds.n, Split::train, rng);
    data.test = gen.sample(ds.n_test, Split::test, rng);
  } else {
    auto [rest, test] = random_split(load_csv(ds.path), ds.test_fraction, Split::train, Split::test, rng);
    if (test.empty()) throw ConfigError("dataset.test_fraction leaves no test samples");
    pool = std::move(rest);
    data.test = std::move(test);
  }

  NoiseSpec noise = cfg.noise;
  if (noise.kind == NoiseKind::asymmetric_superclass && !noise.superclass_map)
    noise.superclass_map = consecutive_superclasses(pool.num_classes, cfg.superclass_group_size);
  Dataset noisy = apply_noise(pool, noise, derive_seed(seed, "noise"));

  auto [train, ref] = carve_reference(noisy, cfg.reference,
                                      ProbeSettings{cfg.model, cfg.trainer.batch_size, cfg.trainer.lr}, seed);
  check_disjoint(train, ref);
  data.train = std::move(train);
  data.reference = std::move(ref);
  return data;
}

RunResult run_experiment(const RunConfig& cfg, std::uint64_t seed, const RunHooks& hooks) {
  cfg.validate();
  RunResult result;
  result.run = cfg.name;
  result.seed = seed;

  const RunData data = prepare_data(cfg, seed);
  const Dataset& train = data.train;
  const std::size_t n = train.size();
  const std::size_t T = cfg.trainer.total_epochs;
  result.train_size = n;
  result.budget = make_budget(cfg.target_prune_ratio, n, cfg.trainer.budget_epochs());
  for (const auto& s : train.samples) result.samples.push_back({s.id, s.noisy_label, s.true_label});

  Rng init = make_stream(seed, "init");
  Model model = Model::initialized(cfg.model, train.dim(), static_cast<std::size_t>(train.num_classes), init);
  Rng shuffle = make_stream(seed, "shuffle");
  TrajectoryBank bank(n, cfg.das.window);
  ReferenceTrajectory ref_traj(cfg.das.window);
  PlanBuilder planner(cfg.policy, n, T, seed);
  const bool keep_logs = hooks.collect_logs || cfg.dump_trajectories || cfg.dump_das;

  MetricsRecord base;
  base.run = cfg.name;
  base.seed = seed;
  base.policy = to_string(cfg.policy.policy);
  base.score_source = to_string(cfg.policy.score_source);
  base.noise_kind = to_string(cfg.noise.kind);
  base.noise_rate = cfg.noise.rate;
  base.target_prune_ratio = cfg.target_prune_ratio;
  base.full_pass_budget = result.budget.full_pass_budget;

  EpochPlan plan = planner.first();
  std::size_t epoch = 1;
  try {
    for (;; ++epoch) {
      const auto t0 = std::chrono::steady_clock::now();
      check_plan(plan, n, cfg.policy);
      if (prunes_by_score(cfg.policy.policy) && !pruning_active(epoch, T, cfg.policy.delta) && plan.pruned_count != 0)
        throw InvariantError("plan prunes samples inside the annealing tail");

      // (a) train on the kept set
      auto observed = train_epoch(model, train, plan, cfg.trainer.batch_size, cfg.trainer.lr_at(epoch), epoch, shuffle);
      result.budget.consumed += plan.kept();

      // (b) trajectories: pruned samples are carried forward unless re-evaluated
      std::vector<std::size_t> extra;
      for (std::size_t id : ids_not_in(plan, n))
        if (cfg.das.fill == TrajFill::reevaluate || !bank.has_observation(id)) extra.push_back(id);
      if (!extra.empty()) {
        std::vector<double> losses(extra.size());
        kernels::parallel::subset_losses(model, train, extra, losses);
        for (std::size_t k = 0; k < extra.size(); ++k) observed.push_back({extra[k], losses[k]});
      }
      bank.record_epoch_losses(epoch, observed);

      // (c) reference loss on the end-of-epoch model
      ref_traj.record_reference_loss(model, data.reference);

      // (d) scores
      std::optional<DasScores> das;
      if (bank.length() >= cfg.das.min_window) das = compute_das_all(bank, ref_traj, cfg.das.correlation);
      ScoreVector scores;
      if (cfg.policy.score_source == ScoreSource::das && das) {
        scores = {das->scores, ScoreSource::das};
      } else {
        const auto last = bank.last_observed();
        scores = {std::vector<double>(last.begin(), last.end()), ScoreSource::epoch_loss};
      }

      // (e) next plan
      EpochPlan next = planner.next(scores, epoch + 1);
      next.scored_at_epoch = bank.epochs_recorded();
      if (next.scored_at_epoch != epoch) throw InvariantError("plan scored from stale trajectories");

      // (f) metrics
      MetricsRecord rec = base;
      rec.epoch = epoch;
      rec.active_score_source = epoch == 1 ? "none" : to_string(plan.score_source);
      if (!prunes_by_score(cfg.policy.policy)) rec.active_score_source = "none";
      rec.test_acc_true_labels =
          static_cast<double>(kernels::parallel::count_correct(model, data.test, LabelSource::truth)) /
          static_cast<double>(data.test.size());
      rec.retained_noise_ratio = retained_noise_ratio(plan, train);
      rec.pruned_fraction = plan.pruned_fraction();
      if (das) rec.mean_das = das->mean();
      rec.consumed_forward_passes = result.budget.consumed;
      const bool budget_done = result.budget.exhausted();
      rec.terminal = budget_done || epoch >= T;
      if (cfg.record_wall_time)
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      result.records.push_back(rec);

      if (keep_logs) {
        for (std::size_t i = 0; i < n; ++i)
          result.trajectory_log.push_back({epoch, i, bank.last_observed(i), bank.carried(i)});
        if (das)
          for (std::size_t i = 0; i < n; ++i) result.das_log.push_back({epoch, i, das->scores[i]});
      }
      if (hooks.on_epoch) hooks.on_epoch(EpochView{epoch, model, data, bank, ref_traj, plan, next, das, rec});

      if (result.budget.consumed > result.budget.full_pass_budget + n)
        throw InvariantError("forward passes overshot the budget by more than one epoch");
      if (rec.terminal) {
        result.stopped_by_budget = budget_done;
        break;
      }
      plan = std::move(next);
    }
  } catch (const DivergenceError& e) {
    result.failed = true;
    result.error = e.what();
    MetricsRecord rec = base;
    rec.epoch = epoch;
    rec.consumed_forward_passes = result.budget.consumed;
    rec.terminal = true;
    rec.status = "failed";
    rec.error = e.what();
    result.records.push_back(rec);
  }
  return result;
}

std::string run_directory(const RunConfig& cfg, std::uint64_t seed) {
  return (fs::path(cfg.output_dir) / cfg.name / ("seed-" + std::to_string(seed))).string();
}

void write_run(const RunConfig& cfg, const RunResult& result, const std::string& dir) {
  fs::create_directories(dir);
  write_metrics_jsonl((fs::path(dir) / "metrics.jsonl").string(), result.records);
  if (cfg.dump_trajectories) write_trajectory_jsonl((fs::path(dir) / "trajectories.jsonl").string(), result.trajectory_log);
  if (cfg.dump_das) write_das_jsonl((fs::path(dir) / "das.jsonl").string(), result.das_log);
  if (cfg.dump_trajectories || cfg.dump_das) write_samples_csv((fs::path(dir) / "samples.csv").string(), result.samples);
}

std::vector<RunResult> sweep(const std::vector<RunConfig>& configs, const std::string& output_dir) {
  if (configs.empty()) throw ConfigError("sweep needs at least one config");
  std::vector<std::pair<const RunConfig*, std::uint64_t>> jobs;
  for (const auto& c : configs)
    for (auto s : c.seeds) jobs.emplace_back(&c, s);

  std::vector<RunResult> results(jobs.size());
  const auto count = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto& [cfg, seed] = jobs[static_cast<std::size_t>(k)];
    try {
      results[k] = run_experiment(*cfg, seed);
    } catch (const std::exception& e) {
      RunResult failed;
      failed.run = cfg->name;
      failed.seed = seed;
      failed.failed = true;
      failed.error = e.what();
      MetricsRecord rec;
      rec.run = cfg->name;
      rec.seed = seed;
      rec.policy = to_string(cfg->policy.policy);
      rec.score_source = to_string(cfg->policy.score_source);
      rec.noise_kind = to_string(cfg->noise.kind);
      rec.noise_rate = cfg->noise.rate;
      rec.target_prune_ratio = cfg->target_prune_ratio;
      rec.terminal = true;
      rec.status = "failed";
      rec.error = e.what();
      failed.records.push_back(rec);
      results[k] = std::move(failed);
    }
  }

  std::vector<MetricsRecord> terminal;
  for (std::size_t k = 0; k < jobs.size(); ++k) {
    write_run(*jobs[k].first, results[k], run_directory(*jobs[k].first, jobs[k].second));
    terminal.push_back(results[k].records.back());
  }
  fs::create_directories(output_dir);
  const auto cells = aggregate(terminal);
  write_aggregate_csv((fs::path(output_dir) / "aggregate.csv").string(), cells);
  write_aggregate_jsonl((fs::path(output_dir) / "aggregate.jsonl").string(), cells);
  return results;
}

}  // namespace trajprune
