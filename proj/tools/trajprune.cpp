// Command-line front end: run a config, sweep a grid, summarize outputs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "trajprune/config.hpp"
#include "trajprune/errors.hpp"
#include "trajprune/harness.hpp"
#include "trajprune/report.hpp"

namespace fs = std::filesystem;
using namespace trajprune;

namespace {

struct DumpFlags {
  bool trajectories = false;
  bool das = false;
  std::optional<std::uint64_t> seed;
};

void apply(RunConfig& cfg, const DumpFlags& flags) {
  if (flags.trajectories) cfg.dump_trajectories = true;
  if (flags.das) cfg.dump_das = true;
  if (flags.seed) cfg.seeds = {*flags.seed};
}

int cmd_run(const std::string& path, const DumpFlags& flags) {
  RunConfig cfg = load_run_config(path);
  apply(cfg, flags);
  int failures = 0;
  for (auto seed : cfg.seeds) {
    const auto result = run_experiment(cfg, seed);
    const auto dir = run_directory(cfg, seed);
    write_run(cfg, result, dir);
    const auto& last = result.records.back();
    if (result.failed) {
      ++failures;
      std::cerr << cfg.name << " seed " << seed << ": FAILED: " << result.error << "\n";
    } else {
      std::cout << cfg.name << " seed " << seed << ": epochs " << last.epoch << ", test acc "
                << format_sig6(last.test_acc_true_labels) << ", forward passes " << last.consumed_forward_passes
                << "/" << last.full_pass_budget << " -> " << dir << "\n";
    }
  }
  return failures == 0 ? 0 : 2;
}

int cmd_sweep(const std::string& path, const DumpFlags& flags) {
  const auto json = read_json_file(path);
  auto configs = expand_sweep(json);
  for (auto& c : configs) apply(c, flags);
  const std::string out_dir = json.value("output_dir", configs.front().output_dir);
  const auto results = sweep(configs, out_dir);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.failed ? 1 : 0;
  std::cout << results.size() << " runs (" << failed << " failed); aggregate written to "
            << (fs::path(out_dir) / "aggregate.csv").string() << "\n";
  return 0;
}

struct ReportArgs {
  std::string input;
  std::string out;
  bool gap_table = false;
  std::string full_input;
  bool hard_vs_noisy = false;
  double top_percent = 10.0;
};

int cmd_report(const ReportArgs& a) {
  if (a.hard_vs_noisy) {
    const fs::path dir(a.input);
    const auto traj = read_trajectory_jsonl((dir / "trajectories.jsonl").string());
    const auto das = fs::exists(dir / "das.jsonl") ? read_das_jsonl((dir / "das.jsonl").string())
                                                    : std::vector<DasRecord>{};
    const auto samples = read_samples_csv((dir / "samples.csv").string());
    write_hard_vs_noisy_csv(a.out, hard_vs_noisy_export(traj, das, samples, a.top_percent));
    std::cout << "hard-vs-noisy series written to " << a.out << "\n";
    return 0;
  }
  const auto cells = aggregate(read_terminal_records(a.input));
  if (a.gap_table) {
    if (a.full_input.empty()) throw ConfigError("--gap-table needs --full-input <dir>");
    const auto full = aggregate(read_terminal_records(a.full_input));
    write_gap_table_csv(a.out, build_gap_table(cells, full));
    std::cout << "gap table written to " << a.out << "\n";
    return 0;
  }
  write_aggregate_csv(a.out, cells);
  std::cout << cells.size() << " cells written to " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic data pruning under label noise: trajectory-alignment scoring experiments"};
  app.require_subcommand(1);

  std::string config;
  DumpFlags flags;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "run only this seed");
    sub->add_flag("--dump-trajectories", flags.trajectories, "write per-sample loss trajectories");
    sub->add_flag("--dump-das", flags.das, "write per-sample alignment scores");
  };
  auto* run = app.add_subcommand("run", "run one config over its seeds");
  add_common(run);
  auto* sw = app.add_subcommand("sweep", "run a grid of configs and aggregate");
  add_common(sw);

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "aggregate run outputs into CSV tables");
  report->add_option("--input", rep.input, "directory of runs (or one run for --hard-vs-noisy)")->required();
  report->add_option("--out", rep.out, "output CSV")->required();
  report->add_flag("--gap-table", rep.gap_table, "gaps relative to full training");
  report->add_option("--full-input", rep.full_input, "directory of full-training runs for --gap-table");
  report->add_flag("--hard-vs-noisy", rep.hard_vs_noisy, "hard-clean vs flipped loss/score series");
  report->add_option("--top-percent", rep.top_percent, "hard-clean share of clean samples, by average loss");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed() || sw->parsed()) {
      auto* sub = run->parsed() ? run : sw;
      if (sub->count("--seed")) flags.seed = seed;
      return run->parsed() ? cmd_run(config, flags) : cmd_sweep(config, flags);
    }
    return cmd_report(rep);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
