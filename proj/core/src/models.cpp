#include "psa/models.hpp"

#include <algorithm>
#include <cmath>

#include "psa/errors.hpp"
#include "psa/rng.hpp"

namespace psa {

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::autoencoder: return "autoencoder";
    case ModelKind::autoencoder_classifier: return "autoencoder_classifier";
    case ModelKind::cnn1d: return "cnn1d";
  }
  return "mlp";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
  for (ModelKind k : {ModelKind::mlp, ModelKind::autoencoder, ModelKind::autoencoder_classifier,
                      ModelKind::cnn1d}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::maxpool1d: return "maxpool1d";
    case LayerKind::flatten: return "flatten";
  }
  return "dense";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) noexcept {
  for (LayerKind k : {LayerKind::dense, LayerKind::conv1d, LayerKind::maxpool1d, LayerKind::flatten}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out, Activation act) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.in = in;
  s.out = out;
  s.activation = act;
  return s;
}

LayerSpec LayerSpec::conv1d(std::size_t filters, std::size_t width, std::size_t channels,
                            Activation act) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.filters = filters;
  s.width = width;
  s.channels = channels;
  s.activation = act;
  return s;
}

LayerSpec LayerSpec::maxpool1d(std::size_t window) {
  LayerSpec s;
  s.kind = LayerKind::maxpool1d;
  s.window = window;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

Shape InputSpec::example_shape() const {
  if (kind == InputKind::mean_vector) return {dim};
  return {max_len, dim};
}

namespace {

std::unique_ptr<Layer> make_layer(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::dense:
      return std::make_unique<DenseLayer>(s.in, s.out, s.activation);
    case LayerKind::conv1d:
      return std::make_unique<Conv1DLayer>(s.filters, s.width, s.channels, s.activation);
    case LayerKind::maxpool1d:
      return std::make_unique<MaxPool1DLayer>(s.window);
    case LayerKind::flatten:
      return std::make_unique<FlattenLayer>();
  }
  throw Error(ErrorKind::BadDimension, "unknown layer kind");
}

void check_positive(std::size_t v, const char* what) {
  if (v == 0) throw Error(ErrorKind::BadDimension, std::string(what) + " must be >= 1");
}

}  // namespace

void ModelSpec::validate() const {
  check_positive(input.dim, "input dim");
  if (input.kind == InputKind::sequence) check_positive(input.max_len, "max_len");
  if (layers.empty()) throw Error(ErrorKind::BadDimension, "model has no layers");
  if (is_classifier() && num_classes < 2) {
    throw Error(ErrorKind::BadDimension, "num_classes must be >= 2");
  }
  if (frozen_layers > layers.size() || encoder_layers > layers.size()) {
    throw Error(ErrorKind::BadDimension, "frozen/encoder layer count exceeds depth");
  }
  for (const auto& l : layers) {
    switch (l.kind) {
      case LayerKind::dense:
        check_positive(l.in, "dense input");
        check_positive(l.out, "dense output");
        break;
      case LayerKind::conv1d:
        check_positive(l.filters, "conv1d filters");
        check_positive(l.width, "conv1d width");
        check_positive(l.channels, "conv1d channels");
        break;
      case LayerKind::maxpool1d:
        check_positive(l.window, "pool window");
        break;
      case LayerKind::flatten:
        break;
    }
  }
  Shape s;
  try {
    s = instantiate().output_shape(input.example_shape());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InputTooShort) throw Error(ErrorKind::SequenceTooShort, e.what());
    throw Error(ErrorKind::BadDimension, e.what());
  }
  const Shape expected = is_classifier() ? Shape{num_classes} : input.example_shape();
  if (s != expected) {
    throw Error(ErrorKind::BadDimension, "network output " + shape_string(s) + ", expected " +
                                             shape_string(expected));
  }
}

std::vector<Shape> ModelSpec::parameter_shapes() const {
  std::vector<Shape> shapes;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::dense) {
      shapes.push_back({l.in, l.out});
      shapes.push_back({l.out});
    } else if (l.kind == LayerKind::conv1d) {
      shapes.push_back({l.filters, l.width, l.channels});
      shapes.push_back({l.filters});
    }
  }
  return shapes;
}

std::size_t ModelSpec::parameter_count() const {
  std::size_t n = 0;
  for (const auto& s : parameter_shapes()) n += shape_size(s);
  return n;
}

std::vector<Shape> ModelSpec::activation_shapes() const {
  const Network net = instantiate();
  std::vector<Shape> out;
  Shape s = input.example_shape();
  for (std::size_t i = 0; i < net.size(); ++i) {
    s = net.layer(i).output_shape(s);
    out.push_back(s);
  }
  return out;
}

std::size_t ModelSpec::weighted_or_pooling_layers() const {
  return static_cast<std::size_t>(std::count_if(
      layers.begin(), layers.end(), [](const LayerSpec& l) { return l.kind != LayerKind::flatten; }));
}

Network ModelSpec::instantiate() const {
  Network net;
  for (const auto& l : layers) net.add(make_layer(l));
  return net;
}

Network TrainedModel::network() const {
  Network net = spec.instantiate();
  auto params = net.parameters(0);
  if (params.size() != parameters.size()) {
    throw Error(ErrorKind::ShapeHeaderMismatch, "model carries " + std::to_string(parameters.size()) +
                                                    " tensors, architecture needs " +
                                                    std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != parameters[i].shape()) {
      throw Error(ErrorKind::ShapeHeaderMismatch, "tensor " + std::to_string(i) + " has shape " +
                                                      shape_string(parameters[i].shape()) +
                                                      ", expected " +
                                                      shape_string(params[i]->shape()));
    }
    *params[i] = parameters[i];
  }
  return net;
}

void TrainedModel::capture(const Network& net) {
  parameters.clear();
  for (const Tensor* t : net.parameters()) parameters.push_back(*t);
}

namespace {

void glorot_fill(Tensor& t, std::size_t fan_in, std::size_t fan_out, Xoshiro256& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
}

}  // namespace

TrainedModel initialize(ModelSpec spec, std::uint64_t seed) {
  spec.validate();
  TrainedModel model;
  model.seed = seed;
  Xoshiro256 rng(seed);
  for (const auto& l : spec.layers) {
    if (l.kind == LayerKind::dense) {
      Tensor w({l.in, l.out});
      glorot_fill(w, l.in, l.out, rng);
      model.parameters.push_back(std::move(w));
      model.parameters.emplace_back(Shape{l.out});
    } else if (l.kind == LayerKind::conv1d) {
      Tensor f({l.filters, l.width, l.channels});
      glorot_fill(f, l.width * l.channels, l.width * l.filters, rng);
      model.parameters.push_back(std::move(f));
      model.parameters.emplace_back(Shape{l.filters});
    }
  }
  model.spec = std::move(spec);
  return model;
}

TrainedModel build_mlp(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                       std::size_t num_classes, std::uint64_t seed) {
  check_positive(input_dim, "input_dim");
  if (num_classes < 2) throw Error(ErrorKind::BadDimension, "num_classes must be >= 2");
  ModelSpec spec;
  spec.kind = ModelKind::mlp;
  spec.input = {InputKind::mean_vector, input_dim, 0};
  spec.num_classes = num_classes;
  std::size_t width = input_dim;
  for (std::size_t h : hidden) {
    check_positive(h, "hidden width");
    spec.layers.push_back(LayerSpec::dense(width, h, Activation::relu));
    width = h;
  }
  spec.layers.push_back(LayerSpec::dense(width, num_classes, Activation::linear));
  return initialize(std::move(spec), seed);
}

TrainedModel build_autoencoder(std::size_t input_dim, const std::vector<std::size_t>& hidden,
                               std::uint64_t seed) {
  check_positive(input_dim, "input_dim");
  if (hidden.empty() || hidden.size() % 2 == 0) {
    throw Error(ErrorKind::BadDimension, "autoencoder needs an odd number of hidden layers");
  }
  ModelSpec spec;
  spec.kind = ModelKind::autoencoder;
  spec.input = {InputKind::mean_vector, input_dim, 0};
  spec.num_classes = 0;
  std::size_t width = input_dim;
  for (std::size_t h : hidden) {
    check_positive(h, "hidden width");
    spec.layers.push_back(LayerSpec::dense(width, h, Activation::relu));
    width = h;
  }
  spec.layers.push_back(LayerSpec::dense(width, input_dim, Activation::linear));
  spec.encoder_layers = (hidden.size() + 1) / 2;
  return initialize(std::move(spec), seed);
}

std::vector<std::size_t> cnn_length_chain(const CnnOptions& o) {
  std::vector<std::size_t> chain;
  std::size_t len = o.max_len;
  for (std::size_t stage = 0; stage < o.stages; ++stage) {
    if (len < o.width) {
      throw Error(ErrorKind::SequenceTooShort,
                  "stage " + std::to_string(stage + 1) + " convolution gets length " +
                      std::to_string(len) + " < width " + std::to_string(o.width) +
                      "; minimum viable max_len is " + std::to_string(min_cnn_length(o)));
    }
    len = len - o.width + 1;
    chain.push_back(len);
    if (len < o.pool) {
      throw Error(ErrorKind::SequenceTooShort,
                  "stage " + std::to_string(stage + 1) + " pooling gets length " +
                      std::to_string(len) + " < window " + std::to_string(o.pool) +
                      "; minimum viable max_len is " + std::to_string(min_cnn_length(o)));
    }
    len /= o.pool;
    chain.push_back(len);
  }
  return chain;
}

std::size_t min_cnn_length(const CnnOptions& o) {
  // Walk backwards from a final pooled length of 1.
  std::size_t len = 1;
  for (std::size_t stage = 0; stage < o.stages; ++stage) {
    len = len * o.pool;        // pool input
    len = len + o.width - 1;   // conv input
  }
  return std::max(len, o.width);
}

TrainedModel build_cnn(const CnnOptions& o, std::uint64_t seed) {
  check_positive(o.dim, "dim");
  check_positive(o.max_len, "max_len");
  check_positive(o.filters, "filters");
  check_positive(o.width, "width");
  check_positive(o.pool, "pool");
  check_positive(o.stages, "stages");
  if (o.num_classes < 2) throw Error(ErrorKind::BadDimension, "num_classes must be >= 2");
  const auto chain = cnn_length_chain(o);

  ModelSpec spec;
  spec.kind = ModelKind::cnn1d;
  spec.input = {InputKind::sequence, o.dim, o.max_len};
  spec.num_classes = o.num_classes;
  std::size_t channels = o.dim;
  for (std::size_t stage = 0; stage < o.stages; ++stage) {
    spec.layers.push_back(LayerSpec::conv1d(o.filters, o.width, channels, Activation::relu));
    spec.layers.push_back(LayerSpec::maxpool1d(o.pool));
    channels = o.filters;
  }
  spec.layers.push_back(LayerSpec::flatten());
  std::size_t width = chain.back() * o.filters;
  for (std::size_t d : o.dense) {
    check_positive(d, "dense width");
    spec.layers.push_back(LayerSpec::dense(width, d, Activation::relu));
    width = d;
  }
  spec.layers.push_back(LayerSpec::dense(width, o.num_classes, Activation::linear));
  return initialize(std::move(spec), seed);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::ShapeMismatch, "argmax of empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace {

void check_batch(const ModelSpec& spec, const Tensor& batch) {
  const Shape ex = spec.input.example_shape();
  if (batch.rank() != ex.size() + 1 || !std::equal(ex.begin(), ex.end(), batch.shape().begin() + 1)) {
    throw Error(ErrorKind::EncodingMismatch, "model expects examples of shape " +
                                                 shape_string(ex) + ", got batch " +
                                                 shape_string(batch.shape()));
  }
}

}  // namespace

Predictor::Predictor(const TrainedModel& model) : spec_(model.spec), net_(model.network()) {
  if (!spec_.is_classifier()) {
    throw Error(ErrorKind::WrongModelKind, "cannot classify with a plain autoencoder");
  }
}

std::vector<Prediction> Predictor::predict(const Tensor& batch) const {
  check_batch(spec_, batch);
  const Tensor probs = softmax(net_.forward(batch));
  const std::size_t k = probs.dim(1);
  std::vector<Prediction> out(probs.dim(0));
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n].distribution.assign(probs.data() + n * k, probs.data() + (n + 1) * k);
    out[n].label = argmax(out[n].distribution);
  }
  return out;
}

Prediction Predictor::predict_one(const Tensor& example) const {
  Shape s{1};
  s.insert(s.end(), example.shape().begin(), example.shape().end());
  return predict(example.reshaped(std::move(s))).front();
}

std::vector<Prediction> predict(const TrainedModel& model, const Tensor& batch) {
  return Predictor(model).predict(batch);
}

Tensor encode_bottleneck(const TrainedModel& model, const Tensor& batch) {
  if (model.spec.kind != ModelKind::autoencoder &&
      model.spec.kind != ModelKind::autoencoder_classifier) {
    throw Error(ErrorKind::WrongModelKind,
                std::string("encode_bottleneck needs an autoencoder, got ") +
                    std::string(to_string(model.spec.kind)));
  }
  check_batch(model.spec, batch);
  return model.network().forward_prefix(batch, model.spec.encoder_layers);
}

std::vector<double> encode_bottleneck(const TrainedModel& model, std::span<const double> input) {
  Tensor batch({1, input.size()}, std::vector<double>(input.begin(), input.end()));
  const Tensor code = encode_bottleneck(model, batch);
  return {code.values().begin(), code.values().end()};
}

}  // namespace psa
