#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trajprune/dataset.hpp"
#include "trajprune/rng.hpp"

namespace trajprune {

enum class Arch { linear, mlp };

struct ArchSpec {
  Arch kind = Arch::linear;
  std::size_t hidden = 0;  // mlp only
};

/// Dense layer view into the model's flat parameter vector. Weights are
/// row-major [out x in], followed by the out biases.
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t offset = 0;

  std::size_t weight_count() const { return in * out; }
  std::size_t param_count() const { return in * out + out; }
};

/// Softmax regression or a one-hidden-layer ReLU network, all parameters
/// stored contiguously so optimizers and gradient checks can treat them as
/// one vector.
class Model {
 public:
  Model(ArchSpec arch, std::size_t input_dim, std::size_t num_classes);

  /// Glorot-uniform weights, zero biases.
  static Model initialized(ArchSpec arch, std::size_t input_dim, std::size_t num_classes, Rng& rng);

  const ArchSpec& arch() const { return arch_; }
  std::size_t input_dim() const { return layers_.front().in; }
  std::size_t num_classes() const { return layers_.back().out; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;
  std::span<double> weights(std::size_t layer);
  std::span<double> bias(std::size_t layer);

  bool all_finite() const;

 private:
  ArchSpec arch_;
  std::vector<DenseLayer> layers_;
  std::vector<double> params_;
};

std::vector<double> forward(const Model& model, std::span<const double> features);

/// Index of the largest logit; ties go to the lowest index.
int predict(const Model& model, std::span<const double> features);

/// -log softmax(logits)[label], via log-sum-exp.
double cross_entropy(std::span<const double> logits, int label);

double per_sample_loss(const Model& model, const Sample& sample);

/// Adds weight * d(loss)/d(params) into grad and returns the loss.
double accumulate_gradient(const Model& model, const Sample& sample, double weight,
                           std::span<double> grad);

struct WeightedSample {
  const Sample* sample = nullptr;
  double weight = 1.0;
};

/// theta <- theta - lr * (1/|batch|) * sum_i w_i * grad loss_i.
/// Returns each member's pre-update loss. Throws DivergenceError when the
/// gradient is not finite.
std::vector<double> weighted_sgd_step(Model& model, std::span<const WeightedSample> batch, double lr);

/// Fraction of samples whose prediction equals the selected label.
double evaluate_accuracy(const Model& model, const Dataset& dataset, LabelSource labels);

}  // namespace trajprune
