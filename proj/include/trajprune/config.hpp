#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trajprune/correlation.hpp"
#include "trajprune/model.hpp"
#include "trajprune/noise.hpp"
#include "trajprune/policy.hpp"

namespace trajprune {

struct DatasetSpec {
  enum class Kind { blobs, csv };
  Kind kind = Kind::blobs;
  // blobs
  std::size_t n = 2000;
  std::size_t d = 32;
  int classes = 10;
  double cluster_std = 1.7;
  double center_scale = 1.0;
  std::size_t n_test = 1000;
  std::optional<std::uint64_t> seed;  // fixes the data across run seeds when set
  // csv
  std::string path;
  double test_fraction = 0.2;
};

struct ReferenceSpec {
  enum class Kind { held_out_clean, pseudo_small_loss, noisy_random, reference_noise };
  Kind kind = Kind::held_out_clean;
  double fraction = 0.1;
  std::size_t probe_epochs = 5;
  double rate = 0.0;  // reference_noise only
};

struct TrainerSpec {
  std::size_t batch_size = 64;
  double lr = 0.1;
  std::size_t total_epochs = 60;  // T: epoch cap and annealing horizon
  std::size_t full_epochs = 0;    // T_full for the budget; 0 means total_epochs
  std::size_t lr_step_epochs = 30;  // step decay period, 0 = constant
  double lr_gamma = 0.1;

  std::size_t budget_epochs() const { return full_epochs == 0 ? total_epochs : full_epochs; }
  double lr_at(std::size_t epoch) const;
};

enum class TrajFill { carry_forward, reevaluate };

struct DasSpec {
  std::size_t window = 10;
  std::size_t min_window = 2;
  Correlation correlation = Correlation::pearson;
  TrajFill fill = TrajFill::carry_forward;
};

struct RunConfig {
  std::string name = "run";
  DatasetSpec dataset;
  NoiseSpec noise;
  int superclass_group_size = 2;
  ReferenceSpec reference;
  ArchSpec model{Arch::linear, 0};
  TrainerSpec trainer;
  PolicyConfig policy;
  DasSpec das;
  double target_prune_ratio = 0.0;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir = "runs";
  bool dump_trajectories = false;
  bool dump_das = false;
  bool record_wall_time = false;

  void validate() const;
};

const char* to_string(ReferenceSpec::Kind k);
const char* to_string(TrajFill f);

/// Parses a run config; unknown keys anywhere raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);

/// A sweep file is {"base": <run config>, "grid": {"dotted.key": [values]},
/// "output_dir": ...}; the grid expands to the cartesian product of overrides.
std::vector<RunConfig> expand_sweep(const nlohmann::json& j);
std::vector<RunConfig> load_sweep(const std::string& path);

nlohmann::json read_json_file(const std::string& path);

}  // namespace trajprune
