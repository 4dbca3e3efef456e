#include "trajprune/trajectory.hpp"

#include <algorithm>
#include <numeric>

#include "trajprune/errors.hpp"
#include "trajprune/kernels.hpp"

namespace trajprune {

TrajectoryBank::TrajectoryBank(std::size_t num_samples, std::size_t window)
    : num_samples_(num_samples),
      window_(window),
      data_(num_samples * window, 0.0),
      last_(num_samples, 0.0),
      seen_(num_samples, 0),
      carried_(num_samples, 0) {
  if (window == 0) throw ConfigError("trajectory window must be positive");
}

void TrajectoryBank::record_epoch_losses(std::size_t epoch, std::span<const LossObservation> observed) {
  if (epoch != epochs_ + 1)
    throw ConfigError("trajectory: expected epoch " + std::to_string(epochs_ + 1) + ", got " +
                      std::to_string(epoch));
  std::vector<double> sum(num_samples_, 0.0);
  std::vector<unsigned> count(num_samples_, 0);
  for (const auto& o : observed) {
    if (o.id >= num_samples_) throw ConfigError("trajectory: sample id out of range");
    sum[o.id] += o.loss;
    ++count[o.id];
  }
  for (std::size_t i = 0; i < num_samples_; ++i)
    if (count[i] == 0 && !seen_[i])
      throw ConfigError("trajectory: sample " + std::to_string(i) + " has no loss to carry forward");

  for (std::size_t i = 0; i < num_samples_; ++i) {
    if (count[i] > 0) {
      last_[i] = sum[i] / count[i];
      seen_[i] = 1;
      carried_[i] = 0;
    } else {
      carried_[i] = 1;
    }
    data_[i * window_ + head_] = last_[i];
  }
  head_ = (head_ + 1) % window_;
  fill_ = std::min(fill_ + 1, window_);
  ++epochs_;
}

std::vector<double> TrajectoryBank::read_window(std::size_t id) const {
  if (id >= num_samples_) throw ConfigError("trajectory: unknown sample id");
  if (epochs_ == 0) throw ConfigError("trajectory: nothing recorded yet");
  std::vector<double> out(fill_);
  const std::size_t start = oldest_slot();
  const double* row = data_.data() + id * window_;
  for (std::size_t j = 0; j < fill_; ++j) out[j] = row[(start + j) % window_];
  return out;
}

std::size_t TrajectoryBank::fill_count(std::size_t id) const {
  if (id >= num_samples_) throw ConfigError("trajectory: unknown sample id");
  return fill_;
}

ReferenceTrajectory::ReferenceTrajectory(std::size_t window) : window_(window), values_(window, 0.0) {
  if (window == 0) throw ConfigError("trajectory window must be positive");
}

void ReferenceTrajectory::push(double mean_loss) {
  values_[head_] = mean_loss;
  head_ = (head_ + 1) % window_;
  fill_ = std::min(fill_ + 1, window_);
}

double ReferenceTrajectory::record_reference_loss(const Model& model, const Dataset& reference_set) {
  if (reference_set.empty()) throw ConfigError("reference set is empty");
  std::vector<double> losses(reference_set.size());
  kernels::parallel::dataset_losses(model, reference_set, losses);
  double total = 0.0;
  for (double l : losses) total += l;
  const double mean = total / static_cast<double>(losses.size());
  push(mean);
  return mean;
}

std::vector<double> ReferenceTrajectory::read() const {
  std::vector<double> out(fill_);
  const std::size_t start = (head_ + window_ - fill_) % window_;
  for (std::size_t j = 0; j < fill_; ++j) out[j] = values_[(start + j) % window_];
  return out;
}

}  // namespace trajprune
