#include "trajprune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "trajprune/errors.hpp"

namespace trajprune {

const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::reference: return "reference";
    case Split::test: return "test";
  }
  return "?";
}

std::size_t Dataset::flipped_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const Sample& s) { return s.is_flipped(); }));
}

void Dataset::validate() const {
  if (num_classes < 1) throw ConfigError("dataset: num_classes must be positive");
  const std::size_t d = dim();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.id != i) throw ConfigError("dataset: ids must be contiguous 0..n-1");
    if (s.features.size() != d) throw ConfigError("dataset: inconsistent feature dimension");
    if (s.noisy_label < 0 || s.noisy_label >= num_classes || s.true_label < 0 ||
        s.true_label >= num_classes)
      throw ConfigError("dataset: label out of range at id " + std::to_string(i));
  }
}

Dataset make_split(std::vector<Sample> samples, int num_classes, Split split) {
  Dataset out;
  out.num_classes = num_classes;
  out.split = split;
  out.samples = std::move(samples);
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i].id = i;
  return out;
}

BlobGenerator::BlobGenerator(std::size_t dim, int num_classes, double cluster_std,
                             double center_scale, Rng& rng)
    : dim_(dim), num_classes_(num_classes), cluster_std_(cluster_std) {
  if (dim == 0 || num_classes < 2) throw ConfigError("blobs: need d >= 1 and C >= 2");
  if (!(cluster_std > 0.0)) throw ConfigError("blobs: cluster_std must be positive");
  std::normal_distribution<double> normal(0.0, center_scale);
  centers_.assign(static_cast<std::size_t>(num_classes), std::vector<double>(dim));
  for (auto& c : centers_)
    for (auto& x : c) x = normal(rng);
}

Dataset BlobGenerator::sample(std::size_t n, Split split, Rng& rng) const {
  std::vector<int> classes(n);
  for (std::size_t i = 0; i < n; ++i) classes[i] = static_cast<int>(i % num_classes_);
  std::shuffle(classes.begin(), classes.end(), rng);

  std::normal_distribution<double> normal(0.0, cluster_std_);
  std::vector<Sample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample& s = samples[i];
    s.source_id = i;
    s.noisy_label = s.true_label = classes[i];
    s.features.resize(dim_);
    const auto& center = centers_[static_cast<std::size_t>(classes[i])];
    for (std::size_t j = 0; j < dim_; ++j) s.features[j] = center[j] + normal(rng);
  }
  return make_split(std::move(samples), num_classes_, split);
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty dataset csv: " + path);

  std::vector<Sample> samples;
  int max_label = -1;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(row) + ": not a number: '" + cell + "'");
      }
    }
    if (values.size() < 3) throw ConfigError(path + ":" + std::to_string(row) + ": need id, label and features");
    Sample s;
    s.source_id = static_cast<std::size_t>(values[0]);
    const double label = values[1];
    if (label < 0 || label != std::floor(label))
      throw ConfigError(path + ":" + std::to_string(row) + ": label must be a non-negative integer");
    s.noisy_label = s.true_label = static_cast<int>(label);
    max_label = std::max(max_label, s.true_label);
    s.features.assign(values.begin() + 2, values.end());
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ConfigError("dataset csv has no rows: " + path);
  Dataset out = make_split(std::move(samples), max_label + 1, Split::train);
  out.validate();
  return out;
}

std::pair<Dataset, Dataset> random_split(const Dataset& data, double fraction, Split rest_split,
                                         Split held_split, Rng& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("split fraction must lie in [0, 1]");
  const std::size_t n = data.size();
  const auto held = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());

  std::vector<Sample> held_samples, rest_samples;
  for (std::size_t k = 0; k < n; ++k) {
    Sample s = data.samples[order[k]];
    (k < held ? held_samples : rest_samples).push_back(std::move(s));
  }
  return {make_split(std::move(rest_samples), data.num_classes, rest_split),
          make_split(std::move(held_samples), data.num_classes, held_split)};
}

}  // namespace trajprune
