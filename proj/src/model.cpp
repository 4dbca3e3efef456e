#include "trajprune/model.hpp"

#include <algorithm>
#include <cmath>

#include "trajprune/errors.hpp"

namespace trajprune {

namespace {

void dense(const Model& m, std::size_t layer, std::span<const double> x, std::span<double> y) {
  const DenseLayer& l = m.layers()[layer];
  const auto w = m.weights(layer);
  const auto b = m.bias(layer);
  for (std::size_t o = 0; o < l.out; ++o) {
    const double* row = w.data() + o * l.in;
    double acc = b[o];
    for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
}

void check_input(const Model& m, std::span<const double> x) {
  if (x.size() != m.input_dim())
    throw ConfigError("feature dimension " + std::to_string(x.size()) + " does not match model input " +
                      std::to_string(m.input_dim()));
}

// dL/dlogits = softmax(logits) - onehot(label), written in place.
double softmax_grad(std::span<double> logits, int label) {
  const double loss = cross_entropy(logits, label);
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  for (std::size_t c = 0; c < logits.size(); ++c) logits[c] = std::exp(logits[c] - mx) / z;
  logits[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

}  // namespace

Model::Model(ArchSpec arch, std::size_t input_dim, std::size_t num_classes) : arch_(arch) {
  if (input_dim == 0 || num_classes == 0) throw ConfigError("model: need input_dim >= 1 and num_classes >= 1");
  if (arch.kind == Arch::mlp) {
    if (arch.hidden == 0) throw ConfigError("model: mlp needs a positive hidden width");
    layers_.push_back({input_dim, arch.hidden, 0});
    layers_.push_back({arch.hidden, num_classes, layers_[0].param_count()});
  } else {
    layers_.push_back({input_dim, num_classes, 0});
  }
  params_.assign(layers_.back().offset + layers_.back().param_count(), 0.0);
}

Model Model::initialized(ArchSpec arch, std::size_t input_dim, std::size_t num_classes, Rng& rng) {
  Model m(arch, input_dim, num_classes);
  for (std::size_t l = 0; l < m.layers_.size(); ++l) {
    const auto& layer = m.layers_[l];
    const double a = std::sqrt(6.0 / static_cast<double>(layer.in + layer.out));
    std::uniform_real_distribution<double> u(-a, a);
    for (double& w : m.weights(l)) w = u(rng);
  }
  return m;
}

std::span<const double> Model::weights(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  return std::span<const double>(params_).subspan(l.offset, l.weight_count());
}
std::span<const double> Model::bias(std::size_t layer) const {
  const auto& l = layers_.at(layer);
  return std::span<const double>(params_).subspan(l.offset + l.weight_count(), l.out);
}
std::span<double> Model::weights(std::size_t layer) {
  const auto& l = layers_.at(layer);
  return std::span<double>(params_).subspan(l.offset, l.weight_count());
}
std::span<double> Model::bias(std::size_t layer) {
  const auto& l = layers_.at(layer);
  return std::span<double>(params_).subspan(l.offset + l.weight_count(), l.out);
}

bool Model::all_finite() const {
  return std::all_of(params_.begin(), params_.end(), [](double v) { return std::isfinite(v); });
}

std::vector<double> forward(const Model& model, std::span<const double> features) {
  check_input(model, features);
  std::vector<double> logits(model.num_classes());
  if (model.arch().kind == Arch::linear) {
    dense(model, 0, features, logits);
    return logits;
  }
  std::vector<double> hidden(model.layers()[0].out);
  dense(model, 0, features, hidden);
  for (double& h : hidden) h = std::max(h, 0.0);
  dense(model, 1, hidden, logits);
  return logits;
}

int predict(const Model& model, std::span<const double> features) {
  const auto logits = forward(model, features);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double cross_entropy(std::span<const double> logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size()) throw ConfigError("label out of range");
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  return std::max(0.0, mx + std::log(z) - logits[static_cast<std::size_t>(label)]);
}

double per_sample_loss(const Model& model, const Sample& sample) {
  return cross_entropy(forward(model, sample.features), sample.noisy_label);
}

double accumulate_gradient(const Model& model, const Sample& sample, double weight,
                           std::span<double> grad) {
  check_input(model, sample.features);
  if (grad.size() != model.parameters().size()) throw ConfigError("gradient buffer has wrong size");
  const std::span<const double> x = sample.features;

  auto outer = [&](std::size_t layer, std::span<const double> delta, std::span<const double> input) {
    const DenseLayer& l = model.layers()[layer];
    double* gw = grad.data() + l.offset;
    double* gb = gw + l.weight_count();
    for (std::size_t o = 0; o < l.out; ++o) {
      const double d = weight * delta[o];
      if (d == 0.0) continue;
      double* row = gw + o * l.in;
      for (std::size_t i = 0; i < l.in; ++i) row[i] += d * input[i];
      gb[o] += d;
    }
  };

  std::vector<double> logits(model.num_classes());
  if (model.arch().kind == Arch::linear) {
    dense(model, 0, x, logits);
    const double loss = softmax_grad(logits, sample.noisy_label);
    if (weight != 0.0) outer(0, logits, x);
    return loss;
  }

  const DenseLayer& l0 = model.layers()[0];
  std::vector<double> pre(l0.out), hidden(l0.out);
  dense(model, 0, x, pre);
  for (std::size_t h = 0; h < l0.out; ++h) hidden[h] = std::max(pre[h], 0.0);
  dense(model, 1, hidden, logits);
  const double loss = softmax_grad(logits, sample.noisy_label);
  if (weight == 0.0) return loss;

  outer(1, logits, hidden);
  const auto w2 = model.weights(1);
  std::vector<double> delta(l0.out, 0.0);
  for (std::size_t o = 0; o < model.num_classes(); ++o) {
    const double g = logits[o];
    const double* row = w2.data() + o * l0.out;
    for (std::size_t h = 0; h < l0.out; ++h) delta[h] += g * row[h];
  }
  for (std::size_t h = 0; h < l0.out; ++h)
    if (pre[h] <= 0.0) delta[h] = 0.0;
  outer(0, delta, x);
  return loss;
}

std::vector<double> weighted_sgd_step(Model& model, std::span<const WeightedSample> batch, double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  std::vector<double> losses;
  losses.reserve(batch.size());
  if (batch.empty()) return losses;

  std::vector<double> grad(model.parameters().size(), 0.0);
  for (const auto& item : batch) {
    if (!(item.weight >= 0.0) || !std::isfinite(item.weight))
      throw ConfigError("sample weights must be finite and nonnegative");
    losses.push_back(accumulate_gradient(model, *item.sample, item.weight, grad));
  }
  const double scale = lr / static_cast<double>(batch.size());
  for (double g : grad)
    if (!std::isfinite(g)) throw DivergenceError("non-finite gradient");
  auto params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) params[k] -= scale * grad[k];
  return losses;
}

double evaluate_accuracy(const Model& model, const Dataset& dataset, LabelSource labels) {
  if (dataset.empty()) throw ConfigError("accuracy of an empty dataset is undefined");
  std::size_t correct = 0;
  for (const Sample& s : dataset.samples)
    if (predict(model, s.features) == s.label(labels)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

}  // namespace trajprune
