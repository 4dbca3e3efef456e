#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trajprune/dataset.hpp"
#include "trajprune/model.hpp"

namespace trajprune {

struct LossObservation {
  std::size_t id = 0;
  double loss = 0.0;
};

/// Per-sample memory bank of the last N epoch losses.
///
/// Every epoch pushes exactly one value per sample: the fresh epoch loss for
/// samples that were observed, otherwise the last observed loss carried
/// forward. All samples therefore share one ring head and one fill count.
/// Storage is sample-major, [n x N], so a sample's window is contiguous.
class TrajectoryBank {
 public:
  TrajectoryBank(std::size_t num_samples, std::size_t window);

  /// Records epoch `epoch` (must be epochs_recorded() + 1). Observations for
  /// the same id are averaged. Throws ConfigError for an unknown id, a
  /// repeated epoch, or a sample with nothing to carry forward.
  void record_epoch_losses(std::size_t epoch, std::span<const LossObservation> observed);

  /// Oldest-to-newest losses of one sample.
  std::vector<double> read_window(std::size_t id) const;

  std::size_t num_samples() const { return num_samples_; }
  std::size_t window() const { return window_; }
  std::size_t epochs_recorded() const { return epochs_; }
  std::size_t length() const { return fill_; }
  std::size_t fill_count(std::size_t id) const;

  double last_observed(std::size_t id) const { return last_.at(id); }
  bool has_observation(std::size_t id) const { return seen_.at(id) != 0; }
  /// Whether the most recent entry of `id` was carried forward.
  bool carried(std::size_t id) const { return carried_.at(id) != 0; }
  std::span<const double> last_observed() const { return last_; }

  /// Raw ring storage; the chronological position j of a sample lives in
  /// slot (oldest_slot() + j) % window().
  std::span<const double> raw() const { return data_; }
  std::size_t oldest_slot() const { return (head_ + window_ - fill_) % window_; }

 private:
  std::size_t num_samples_;
  std::size_t window_;
  std::size_t epochs_ = 0;
  std::size_t fill_ = 0;
  std::size_t head_ = 0;  // next slot to write
  std::vector<double> data_;
  std::vector<double> last_;
  std::vector<char> seen_;
  std::vector<char> carried_;
};

/// Ring buffer of per-epoch mean reference losses.
class ReferenceTrajectory {
 public:
  explicit ReferenceTrajectory(std::size_t window);

  void push(double mean_loss);
  /// Pushes the mean per-sample loss of the current model over the set.
  double record_reference_loss(const Model& model, const Dataset& reference_set);

  std::vector<double> read() const;
  std::size_t window() const { return window_; }
  std::size_t length() const { return fill_; }

 private:
  std::size_t window_;
  std::size_t fill_ = 0;
  std::size_t head_ = 0;
  std::vector<double> values_;
};

}  // namespace trajprune
