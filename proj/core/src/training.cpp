#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "psa/errors.hpp"
#include "psa/models.hpp"
#include "psa/rng.hpp"

namespace psa {

namespace {

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kHeadInitStream = 2;
constexpr std::size_t kEvalChunk = 256;

void check_examples(const ModelSpec& spec, const Examples& data, Objective objective,
                    std::string_view which) {
  if (data.size() == 0) return;
  const Shape ex = spec.input.example_shape();
  const Shape& s = data.inputs.shape();
  if (s.size() != ex.size() + 1 || !std::equal(ex.begin(), ex.end(), s.begin() + 1)) {
    throw Error(ErrorKind::EncodingMismatch, std::string(which) + " inputs " + shape_string(s) +
                                                 " do not match model input " + shape_string(ex));
  }
  if (objective == Objective::classification) {
    if (data.labels.size() != data.size()) {
      throw Error(ErrorKind::EncodingMismatch, std::string(which) + " set has " +
                                                   std::to_string(data.labels.size()) +
                                                   " labels for " + std::to_string(data.size()) +
                                                   " inputs");
    }
    for (std::size_t label : data.labels) {
      if (label >= spec.num_classes) {
        throw Error(ErrorKind::EncodingMismatch, "label " + std::to_string(label) +
                                                     " out of range for " +
                                                     std::to_string(spec.num_classes) + " classes");
      }
    }
  }
}

LossTarget make_target(Objective objective, std::span<const std::size_t> labels, const Tensor& inputs) {
  return objective == Objective::classification ? LossTarget::classes(labels)
                                                : LossTarget::reconstruction(inputs);
}

}  // namespace

double evaluate_loss(const Network& net, const Examples& data, Objective objective,
                     double* accuracy) {
  const std::size_t n = data.size();
  if (n == 0) throw Error(ErrorKind::EncodingMismatch, "cannot evaluate an empty set");
  double total = 0.0;
  std::size_t correct = 0;
  for (std::size_t first = 0; first < n; first += kEvalChunk) {
    const std::size_t count = std::min(kEvalChunk, n - first);
    const Tensor x = data.inputs.slice_rows(first, count);
    const Tensor out = net.forward(x);
    if (objective == Objective::classification) {
      const std::span<const std::size_t> labels(data.labels.data() + first, count);
      const Tensor probs = softmax(out);
      total += cross_entropy(probs, labels) * static_cast<double>(count);
      const std::size_t k = probs.dim(1);
      for (std::size_t i = 0; i < count; ++i) {
        if (argmax(std::span<const double>(probs.data() + i * k, k)) == labels[i]) ++correct;
      }
    } else {
      total += mse(x, out) * static_cast<double>(count);
    }
  }
  if (accuracy) *accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return total / static_cast<double>(n);
}

TrainedModel train(TrainedModel model, const Examples& train_set, const Examples& valid_set,
                   const OptimizerConfig& config, Objective objective, const EpochCallback& on_epoch) {
  config.validate();
  const ModelSpec& spec = model.spec;
  if (objective == Objective::classification && !spec.is_classifier()) {
    throw Error(ErrorKind::WrongModelKind, "classification objective on a plain autoencoder");
  }
  if (objective == Objective::reconstruction && spec.kind != ModelKind::autoencoder) {
    throw Error(ErrorKind::WrongModelKind, "reconstruction objective needs an autoencoder");
  }
  if (train_set.size() == 0) throw Error(ErrorKind::EncodingMismatch, "empty training set");
  check_examples(spec, train_set, objective, "training");
  check_examples(spec, valid_set, objective, "validation");

  Network net = model.network();
  const std::size_t first_trainable = spec.frozen_layers;
  const auto params = net.parameters(first_trainable);
  const auto grads = net.gradients(first_trainable);
  Optimizer optimizer(config);

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Xoshiro256 shuffle_rng(derive_seed(config.seed, kShuffleStream));

  const bool has_valid = valid_set.size() > 0;
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best_params;
  model.history.clear();
  model.best_epoch = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    fisher_yates(std::span<std::size_t>(order), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t first = 0; first < n; first += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(config.batch_size, n - first);
      const std::span<const std::size_t> rows(order.data() + first, count);
      const Tensor x = train_set.inputs.gather_rows(rows);
      std::vector<std::size_t> labels;
      if (objective == Objective::classification) {
        labels.reserve(count);
        for (std::size_t r : rows) labels.push_back(train_set.labels[r]);
      }
      double loss = 0.0;
      try {
        const Tensor out = net.forward_train(x);
        loss = backward(net, out, make_target(objective, labels, x), first_trainable);
      } catch (const Error& e) {
        // Overflowing logits surface from softmax before any loss exists.
        if (e.kind() != ErrorKind::NonFiniteInput) throw;
        loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(loss)) {
        throw Error(ErrorKind::NonFiniteLoss, "non-finite loss at epoch " + std::to_string(epoch) +
                                                  ", batch " + std::to_string(batch_index + 1));
      }
      optimizer.step(params, grads);
      epoch_loss += loss * static_cast<double>(count);
    }

    EpochRecord record;
    record.train_loss = epoch_loss / static_cast<double>(n);
    double accuracy = 0.0;
    try {
      record.valid_loss = evaluate_loss(net, has_valid ? valid_set : train_set, objective, &accuracy);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NonFiniteInput) throw;
      record.valid_loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (objective == Objective::classification) record.valid_accuracy = accuracy;
    if (!std::isfinite(record.valid_loss)) {
      throw Error(ErrorKind::NonFiniteLoss, "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    model.history.push_back(record);
    if (record.valid_loss < best_loss) {
      best_loss = record.valid_loss;
      model.best_epoch = epoch;
      best_params.clear();
      for (const Tensor* t : std::as_const(net).parameters()) best_params.push_back(*t);
    }
    if (on_epoch) on_epoch(epoch, record);
  }

  model.parameters = std::move(best_params);
  return model;
}

TrainedModel train_autoencoder_classifier(const Examples& train_set, const Examples& valid_set,
                                          const OptimizerConfig& autoencoder_config,
                                          const OptimizerConfig& classifier_config,
                                          const AutoencoderClassifierOptions& options,
                                          const EpochCallback& on_epoch) {
  if (train_set.inputs.rank() != 2) {
    throw Error(ErrorKind::EncodingMismatch, "autoencoder classifier needs mean-vector inputs");
  }
  const std::size_t dim = train_set.inputs.dim(1);

  TrainedModel autoencoder = build_autoencoder(dim, options.autoencoder_hidden, options.seed);
  Examples ae_train{train_set.inputs, {}};
  Examples ae_valid{valid_set.inputs, {}};
  autoencoder = train(std::move(autoencoder), ae_train, ae_valid, autoencoder_config,
                      Objective::reconstruction);

  const std::size_t encoder_layers = autoencoder.spec.encoder_layers;
  ModelSpec spec;
  spec.kind = ModelKind::autoencoder_classifier;
  spec.input = autoencoder.spec.input;
  spec.num_classes = options.num_classes;
  spec.layers.assign(autoencoder.spec.layers.begin(),
                     autoencoder.spec.layers.begin() + static_cast<std::ptrdiff_t>(encoder_layers));
  spec.frozen_layers = encoder_layers;
  spec.encoder_layers = encoder_layers;
  std::size_t width = spec.layers.back().out;
  for (std::size_t h : options.head_hidden) {
    spec.layers.push_back(LayerSpec::dense(width, h, Activation::relu));
    width = h;
  }
  spec.layers.push_back(LayerSpec::dense(width, options.num_classes, Activation::linear));

  TrainedModel composite = initialize(spec, derive_seed(options.seed, kHeadInitStream));
  composite.seed = options.seed;
  const std::size_t encoder_tensors = 2 * encoder_layers;
  for (std::size_t i = 0; i < encoder_tensors; ++i) composite.parameters[i] = autoencoder.parameters[i];

  composite = train(std::move(composite), train_set, valid_set, classifier_config,
                    Objective::classification, on_epoch);
  composite.pretrain_history = autoencoder.history;
  return composite;
}

}  // namespace psa
