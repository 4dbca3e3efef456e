#pragma once

// Data-parallel inner loops. Each kernel exists twice: a plain serial loop
// kept as the reference, and an OpenMP version writing disjoint output
// slots, so results are identical regardless of thread count.

#include <cstddef>
#include <span>

#include "trajprune/correlation.hpp"
#include "trajprune/dataset.hpp"
#include "trajprune/model.hpp"

namespace trajprune {
class TrajectoryBank;
}

namespace trajprune::kernels {

namespace serial {
/// out[i] = loss of dataset[i] against its noisy label.
void dataset_losses(const Model& model, const Dataset& data, std::span<double> out);
/// out[k] = loss of dataset[ids[k]].
void subset_losses(const Model& model, const Dataset& data, std::span<const std::size_t> ids,
                   std::span<double> out);
/// out[i] = correlation of sample i's window with the reference read-out.
void alignment_scores(const TrajectoryBank& bank, std::span<const double> reference, Correlation kind,
                      std::span<double> out);
/// Number of samples whose prediction equals the selected label.
std::size_t count_correct(const Model& model, const Dataset& data, LabelSource labels);
}  // namespace serial

namespace parallel {
void dataset_losses(const Model& model, const Dataset& data, std::span<double> out);
void subset_losses(const Model& model, const Dataset& data, std::span<const std::size_t> ids,
                   std::span<double> out);
void alignment_scores(const TrajectoryBank& bank, std::span<const double> reference, Correlation kind,
                      std::span<double> out);
std::size_t count_correct(const Model& model, const Dataset& data, LabelSource labels);
}  // namespace parallel

}  // namespace trajprune::kernels
