#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psa/layers.hpp"
#include "psa/network.hpp"
#include "psa/optimizer.hpp"
#include "psa/tensor.hpp"

namespace psa {

enum class ModelKind { mlp, autoencoder, autoencoder_classifier, cnn1d };

std::string_view to_string(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;

enum class LayerKind { dense, conv1d, maxpool1d, flatten };

std::string_view to_string(LayerKind kind) noexcept;
std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept;

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in = 0;        // dense
  std::size_t out = 0;       // dense
  std::size_t filters = 0;   // conv1d
  std::size_t width = 0;     // conv1d
  std::size_t channels = 0;  // conv1d input channels
  std::size_t window = 0;    // maxpool1d
  Activation activation = Activation::linear;

  static LayerSpec dense(std::size_t in, std::size_t out, Activation act);
  static LayerSpec conv1d(std::size_t filters, std::size_t width, std::size_t channels,
                          Activation act = Activation::relu);
  static LayerSpec maxpool1d(std::size_t window);
  static LayerSpec flatten();

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

enum class InputKind { mean_vector, sequence };

struct InputSpec {
  InputKind kind = InputKind::mean_vector;
  std::size_t dim = 0;
  std::size_t max_len = 0;  // sequence inputs only

  /// Per-example shape: (dim) or (max_len, dim).
  Shape example_shape() const;

  friend bool operator==(const InputSpec&, const InputSpec&) = default;
};

/// Architecture descriptor. Classifiers end in a dense layer whose outputs
/// are logits fed to softmax; the plain autoencoder ends in its linear
/// reconstruction layer.
struct ModelSpec {
  ModelKind kind = ModelKind::mlp;
  InputSpec input;
  std::vector<LayerSpec> layers;
  std::size_t num_classes = 2;  // 0 for the plain autoencoder
  std::size_t frozen_layers = 0;
  std::size_t encoder_layers = 0;  // autoencoder kinds: layers up to the bottleneck

  bool is_classifier() const noexcept { return kind != ModelKind::autoencoder; }

  /// Checks every layer chains onto the previous one; throws BadDimension.
  void validate() const;

  std::vector<Shape> parameter_shapes() const;
  std::size_t parameter_count() const;
  /// Per-example activation shapes after each layer.
  std::vector<Shape> activation_shapes() const;
  /// Layers with weights or pooling, i.e. everything except flatten.
  std::size_t weighted_or_pooling_layers() const;

  /// A network with this architecture and zero parameters.
  Network instantiate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct EpochRecord {
  double train_loss = 0.0;
  double valid_loss = 0.0;
  std::optional<double> valid_accuracy;  // classification only

  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainedModel {
  ModelSpec spec;
  std::vector<Tensor> parameters;
  std::vector<EpochRecord> history;
  std::vector<EpochRecord> pretrain_history;  // autoencoder stage of the composite model
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;  // 1-based; 0 when untrained

  /// Builds a network and loads the parameters into it.
  Network network() const;
  void capture(const Network& net);

  friend bool operator==(const TrainedModel&, const TrainedModel&) = default;
};

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
TrainedModel initialize(ModelSpec spec, std::uint64_t seed);

inline const std::vector<std::size_t> kDefaultMlpHidden{100};
inline const std::vector<std::size_t> kDefaultAutoencoderHidden{1500, 512, 1500};
inline const std::vector<std::size_t> kDefaultCnnDense{5000, 500};

TrainedModel build_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                       std::size_t num_classes, std::uint64_t seed);

/// Symmetric dense autoencoder. `hidden` must have odd length; its middle
/// entry is the bottleneck.
TrainedModel build_autoencoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                               std::uint64_t seed);

struct CnnOptions {
  std::size_t max_len = 100;
  std::size_t dim = 300;
  std::size_t num_classes = 2;
  std::size_t filters = 15;
  std::size_t width = 2;
  std::size_t pool = 2;
  std::size_t stages = 4;
  std::vector<std::size_t> dense = kDefaultCnnDense;
};

/// Sequence lengths after each conv and each pool, in order.
std::vector<std::size_t> cnn_length_chain(const CnnOptions& options);
/// Smallest max_len for which every stage still has input to work on.
std::size_t min_cnn_length(const CnnOptions& options);

TrainedModel build_cnn(const CnnOptions& options, std::uint64_t seed);

struct Prediction {
  std::size_t label = 0;
  std::vector<double> distribution;
};

/// Index of the largest value; the lowest index wins ties.
std::size_t argmax(std::span<const double> values);

/// Inference-only view of a trained classifier. `predict` is const and safe
/// to call from several threads.
class Predictor {
 public:
  explicit Predictor(const TrainedModel& model);

  /// Batched inputs (N, example_shape...) -> N predictions in order.
  std::vector<Prediction> predict(const Tensor& batch) const;
  Prediction predict_one(const Tensor& example) const;

  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  ModelSpec spec_;
  Network net_;
};

std::vector<Prediction> predict(const TrainedModel& model, const Tensor& batch);

/// Runs the encoder half of an autoencoder (plain or composite).
std::vector<double> encode_bottleneck(const TrainedModel& model, std::span<const double> input);
Tensor encode_bottleneck(const TrainedModel& model, const Tensor& batch);

// ---------------------------------------------------------------- training

enum class Objective { classification, reconstruction };

struct Examples {
  Tensor inputs;                    // (N, example_shape...)
  std::vector<std::size_t> labels;  // empty for reconstruction

  std::size_t size() const { return inputs.empty() ? 0 : inputs.dim(0); }
};

using EpochCallback = std::function<void(std::size_t epoch, const EpochRecord&)>;

/// Seeded minibatch training. Returns the parameters from the epoch with the
/// lowest validation loss (training loss when `valid` is empty) together
/// with the full per-epoch history.
TrainedModel train(TrainedModel model, const Examples& train_set, const Examples& valid_set,
                   const OptimizerConfig& config, Objective objective,
                   const EpochCallback& on_epoch = {});

struct AutoencoderClassifierOptions {
  std::vector<std::size_t> autoencoder_hidden = kDefaultAutoencoderHidden;
  std::vector<std::size_t> head_hidden = kDefaultMlpHidden;
  std::size_t num_classes = 2;
  std::uint64_t seed = 0;
};

/// Stage 1 trains an autoencoder on the inputs; stage 2 freezes its encoder
/// and trains a classifier head on the bottleneck codes.
TrainedModel train_autoencoder_classifier(const Examples& train_set, const Examples& valid_set,
                                          const OptimizerConfig& autoencoder_config,
                                          const OptimizerConfig& classifier_config,
                                          const AutoencoderClassifierOptions& options,
                                          const EpochCallback& on_epoch = {});

/// Mean loss over a dataset; `accuracy` receives classification accuracy.
double evaluate_loss(const Network& net, const Examples& data, Objective objective,
                     double* accuracy = nullptr);

}  // namespace psa
