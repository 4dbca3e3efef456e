#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trajprune/rng.hpp"

namespace trajprune {

enum class Split { train, reference, test };
enum class LabelSource { noisy, truth };

const char* to_string(Split s);

struct Sample {
  std::size_t id = 0;         // position within the owning dataset
  std::size_t source_id = 0;  // position in the pool the dataset was carved from
  std::vector<double> features;
  int noisy_label = 0;
  int true_label = 0;  // metrics only; never read by training or scoring

  bool is_flipped() const { return noisy_label != true_label; }
  int label(LabelSource src) const { return src == LabelSource::noisy ? noisy_label : true_label; }
};

struct Dataset {
  std::vector<Sample> samples;
  int num_classes = 0;
  Split split = Split::train;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  std::size_t dim() const { return samples.empty() ? 0 : samples.front().features.size(); }
  const Sample& operator[](std::size_t i) const { return samples[i]; }

  std::size_t flipped_count() const;
  bool is_clean() const { return flipped_count() == 0; }

  /// Throws ConfigError unless ids are 0..n-1, labels lie in [0, C) and
  /// every feature vector has the same length.
  void validate() const;
};

/// Builds a dataset from the given samples, renumbering ids 0..n-1 and
/// keeping each sample's source_id.
Dataset make_split(std::vector<Sample> samples, int num_classes, Split split);

/// Isotropic Gaussian blobs around class centers drawn once per generator.
class BlobGenerator {
 public:
  BlobGenerator(std::size_t dim, int num_classes, double cluster_std, double center_scale, Rng& rng);

  /// n samples with classes assigned round-robin (balanced), then shuffled.
  Dataset sample(std::size_t n, Split split, Rng& rng) const;

  const std::vector<std::vector<double>>& centers() const { return centers_; }

 private:
  std::size_t dim_;
  int num_classes_;
  double cluster_std_;
  std::vector<std::vector<double>> centers_;
};

/// Reads "id,label,f0,f1,..." rows (header line required). Labels are taken
/// as clean; the file's id column is kept as source_id.
Dataset load_csv(const std::string& path);

/// Random split of a dataset into (rest, held) with round(fraction * n) held.
std::pair<Dataset, Dataset> random_split(const Dataset& data, double fraction, Split rest_split,
                                         Split held_split, Rng& rng);

}  // namespace trajprune
