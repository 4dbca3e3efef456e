#include "trajprune/kernels.hpp"

#include <vector>

#include "trajprune/errors.hpp"
#include "trajprune/trajectory.hpp"

namespace trajprune::kernels {

namespace {

void check_sizes(std::size_t expected, std::size_t got) {
  if (expected != got) throw ConfigError("kernel output span has wrong length");
}

void check_alignment(const TrajectoryBank& bank, std::span<const double> reference) {
  if (bank.length() != reference.size())
    throw ConfigError("trajectory length " + std::to_string(bank.length()) +
                      " is not aligned with reference length " + std::to_string(reference.size()));
  if (reference.empty()) throw ConfigError("cannot score empty trajectories");
}

// Chronological copy of sample i's window into buf.
inline void gather(const TrajectoryBank& bank, std::size_t i, std::vector<double>& buf) {
  const std::size_t w = bank.window();
  const std::size_t start = bank.oldest_slot();
  const double* row = bank.raw().data() + i * w;
  for (std::size_t j = 0; j < buf.size(); ++j) buf[j] = row[(start + j) % w];
}

// Exceptions must not escape an OpenMP region, so parallel kernels validate
// everything per_sample_loss would reject before entering one.
void check_model(const Model& model, const Dataset& data) {
  if (!data.empty() && data.dim() != model.input_dim())
    throw ConfigError("dataset dimension does not match model input");
  if (data.num_classes > static_cast<int>(model.num_classes()))
    throw ConfigError("dataset has more classes than the model");
}

}  // namespace

namespace serial {

void dataset_losses(const Model& model, const Dataset& data, std::span<double> out) {
  check_sizes(data.size(), out.size());
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = per_sample_loss(model, data.samples[i]);
}

void subset_losses(const Model& model, const Dataset& data, std::span<const std::size_t> ids,
                   std::span<double> out) {
  check_sizes(ids.size(), out.size());
  for (std::size_t k = 0; k < ids.size(); ++k) out[k] = per_sample_loss(model, data.samples.at(ids[k]));
}

void alignment_scores(const TrajectoryBank& bank, std::span<const double> reference, Correlation kind,
                      std::span<double> out) {
  check_sizes(bank.num_samples(), out.size());
  check_alignment(bank, reference);
  const PreparedReference ref(kind, reference);
  std::vector<double> buf(reference.size());
  for (std::size_t i = 0; i < bank.num_samples(); ++i) {
    gather(bank, i, buf);
    out[i] = ref.score(buf);
  }
}

std::size_t count_correct(const Model& model, const Dataset& data, LabelSource labels) {
  std::size_t correct = 0;
  for (const auto& s : data.samples)
    if (predict(model, s.features) == s.label(labels)) ++correct;
  return correct;
}

}  // namespace serial

namespace parallel {

void dataset_losses(const Model& model, const Dataset& data, std::span<double> out) {
  check_sizes(data.size(), out.size());
  check_model(model, data);
  const auto n = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = per_sample_loss(model, data.samples[i]);
}

void subset_losses(const Model& model, const Dataset& data, std::span<const std::size_t> ids,
                   std::span<double> out) {
  check_sizes(ids.size(), out.size());
  check_model(model, data);
  for (std::size_t id : ids)
    if (id >= data.size()) throw ConfigError("sample id out of range");
  const auto n = static_cast<std::ptrdiff_t>(ids.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) out[k] = per_sample_loss(model, data.samples[ids[k]]);
}

void alignment_scores(const TrajectoryBank& bank, std::span<const double> reference, Correlation kind,
                      std::span<double> out) {
  check_sizes(bank.num_samples(), out.size());
  check_alignment(bank, reference);
  const PreparedReference ref(kind, reference);
  const auto n = static_cast<std::ptrdiff_t>(bank.num_samples());
#pragma omp parallel
  {
    std::vector<double> buf(reference.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      gather(bank, static_cast<std::size_t>(i), buf);
      out[i] = ref.score(buf);
    }
  }
}

std::size_t count_correct(const Model& model, const Dataset& data, LabelSource labels) {
  check_model(model, data);
  const auto n = static_cast<std::ptrdiff_t>(data.size());
  std::size_t correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& s = data.samples[i];
    if (predict(model, s.features) == s.label(labels)) ++correct;
  }
  return correct;
}

}  // namespace parallel

}  // namespace trajprune::kernels
