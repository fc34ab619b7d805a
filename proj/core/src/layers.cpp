#include "psa/layers.hpp"

#include <algorithm>
#include <cmath>

#include "psa/errors.hpp"

namespace psa {

std::string_view to_string(Activation a) noexcept {
  switch (a) {
    case Activation::linear: return "linear";
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
  }
  return "linear";
}

std::optional<Activation> parse_activation(std::string_view name) noexcept {
  if (name == "linear") return Activation::linear;
  if (name == "relu") return Activation::relu;
  if (name == "sigmoid") return Activation::sigmoid;
  return std::nullopt;
}

namespace {

void activate(Activation a, std::span<double> values) noexcept {
  switch (a) {
    case Activation::linear:
      return;
    case Activation::relu:
      for (double& v : values) v = v > 0.0 ? v : 0.0;
      return;
    case Activation::sigmoid:
      for (double& v : values) v = 1.0 / (1.0 + std::exp(-v));
      return;
  }
}

// Multiplies grad by the activation derivative, expressed through the
// activation's output. relu'(0) is taken as 0.
void activation_backward(Activation a, std::span<const double> out, std::span<double> grad) noexcept {
  switch (a) {
    case Activation::linear:
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(out[i] > 0.0)) grad[i] = 0.0;
      }
      return;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= out[i] * (1.0 - out[i]);
      return;
  }
}

Shape with_batch(std::size_t batch, const Shape& inner) {
  Shape s{batch};
  s.insert(s.end(), inner.begin(), inner.end());
  return s;
}

Shape without_batch(const Shape& s) { return Shape(s.begin() + 1, s.end()); }

}  // namespace

void Layer::require_cache(std::string_view who) {
  if (!cached_) {
    throw Error(ErrorKind::StaleCache,
                std::string(who) + " backward called without a matching forward_train");
  }
  cached_ = false;
}

// ---------------------------------------------------------------- dense

DenseLayer::DenseLayer(std::size_t in, std::size_t out, Activation activation)
    : params_{Tensor({in, out}), Tensor({out})},
      grads_{Tensor({in, out}), Tensor({out})},
      activation_(activation) {}

DenseLayer::DenseLayer(Tensor weights, Tensor bias, Activation activation)
    : params_{std::move(weights), std::move(bias)}, activation_(activation) {
  if (params_[0].rank() != 2 || params_[1].rank() != 1 || params_[1].dim(0) != params_[0].dim(1)) {
    throw Error(ErrorKind::ShapeMismatch, "dense weights " + shape_string(params_[0].shape()) +
                                              " incompatible with bias " +
                                              shape_string(params_[1].shape()));
  }
  grads_[0] = Tensor(params_[0].shape());
  grads_[1] = Tensor(params_[1].shape());
}

Shape DenseLayer::output_shape(const Shape& input) const {
  if (input.size() != 1 || input[0] != in()) {
    throw Error(ErrorKind::ShapeMismatch, "dense layer expects (" + std::to_string(in()) +
                                              "), got " + shape_string(input));
  }
  return {out()};
}

Tensor DenseLayer::forward(const Tensor& x) const {
  if (x.rank() != 2 || x.dim(1) != in()) {
    throw Error(ErrorKind::ShapeMismatch, "dense layer expects (batch, " + std::to_string(in()) +
                                              "), got " + shape_string(x.shape()));
  }
  const std::size_t batch = x.dim(0);
  const std::size_t n_in = in();
  const std::size_t n_out = out();
  const double* w = params_[0].data();
  const double* b = params_[1].data();
  Tensor y({batch, n_out});
  for (std::size_t n = 0; n < batch; ++n) {
    double* row = y.data() + n * n_out;
    std::copy(b, b + n_out, row);
    const double* xr = x.data() + n * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      const double xi = xr[i];
      if (xi == 0.0) continue;
      const double* wr = w + i * n_out;
      for (std::size_t j = 0; j < n_out; ++j) row[j] += xi * wr[j];
    }
  }
  activate(activation_, y.values());
  return y;
}

Tensor DenseLayer::forward_train(const Tensor& x) {
  Tensor y = forward(x);
  input_ = x;
  output_ = y;
  cached_ = true;
  return y;
}

Tensor DenseLayer::backward(const Tensor& grad_out, bool param_grads) {
  require_cache("dense");
  if (grad_out.shape() != output_.shape()) {
    throw Error(ErrorKind::ShapeMismatch, "dense gradient shape " + shape_string(grad_out.shape()));
  }
  const std::size_t batch = input_.dim(0);
  const std::size_t n_in = in();
  const std::size_t n_out = out();

  Tensor g = grad_out;
  activation_backward(activation_, output_.values(), g.values());

  if (param_grads) {
    grads_[0].fill(0.0);
    grads_[1].fill(0.0);
    double* dw = grads_[0].data();
    double* db = grads_[1].data();
    for (std::size_t n = 0; n < batch; ++n) {
      const double* gr = g.data() + n * n_out;
      const double* xr = input_.data() + n * n_in;
      for (std::size_t j = 0; j < n_out; ++j) db[j] += gr[j];
      for (std::size_t i = 0; i < n_in; ++i) {
        const double xi = xr[i];
        if (xi == 0.0) continue;
        double* dwr = dw + i * n_out;
        for (std::size_t j = 0; j < n_out; ++j) dwr[j] += xi * gr[j];
      }
    }
  }

  Tensor dx({batch, n_in});
  const double* w = params_[0].data();
  for (std::size_t n = 0; n < batch; ++n) {
    const double* gr = g.data() + n * n_out;
    double* dxr = dx.data() + n * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      const double* wr = w + i * n_out;
      double acc = 0.0;
      for (std::size_t j = 0; j < n_out; ++j) acc += gr[j] * wr[j];
      dxr[i] = acc;
    }
  }
  return dx;
}

std::unique_ptr<Layer> DenseLayer::clone() const {
  return std::make_unique<DenseLayer>(params_[0], params_[1], activation_);
}

// ---------------------------------------------------------------- conv1d

Conv1DLayer::Conv1DLayer(std::size_t num_filters, std::size_t width, std::size_t in_channels,
                         Activation activation)
    : Conv1DLayer(Tensor({num_filters, width, in_channels}), Tensor({num_filters}), activation) {}

Conv1DLayer::Conv1DLayer(Tensor filters, Tensor bias, Activation activation)
    : params_{std::move(filters), std::move(bias)}, activation_(activation) {
  if (params_[0].rank() != 3 || params_[1].rank() != 1 || params_[1].dim(0) != params_[0].dim(0)) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d filters " + shape_string(params_[0].shape()) +
                                              " incompatible with bias " +
                                              shape_string(params_[1].shape()));
  }
  grads_[0] = Tensor(params_[0].shape());
  grads_[1] = Tensor(params_[1].shape());
}

Shape Conv1DLayer::output_shape(const Shape& input) const {
  if (input.size() != 2 || input[1] != in_channels()) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d expects (len, " + std::to_string(in_channels()) +
                                              "), got " + shape_string(input));
  }
  if (input[0] < width()) {
    throw Error(ErrorKind::InputTooShort, "conv1d input length " + std::to_string(input[0]) +
                                              " is shorter than filter width " +
                                              std::to_string(width()));
  }
  return {input[0] - width() + 1, num_filters()};
}

void Conv1DLayer::check_input(const Tensor& x) const {
  if (x.rank() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d expects (batch, len, channels), got " +
                                              shape_string(x.shape()));
  }
  output_shape(without_batch(x.shape()));
}

Tensor Conv1DLayer::forward(const Tensor& x) const {
  check_input(x);
  const std::size_t batch = x.dim(0);
  const std::size_t len = x.dim(1);
  const std::size_t ch = x.dim(2);
  const std::size_t nf = num_filters();
  const std::size_t span = width() * ch;  // a window is contiguous in row-major order
  const std::size_t out_len = len - width() + 1;
  const double* f = params_[0].data();
  const double* b = params_[1].data();

  Tensor y({batch, out_len, nf});
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t t = 0; t < out_len; ++t) {
      const double* window = x.data() + (n * len + t) * ch;
      double* yr = y.data() + (n * out_len + t) * nf;
      for (std::size_t k = 0; k < nf; ++k) {
        const double* fk = f + k * span;
        double acc = b[k];
        for (std::size_t i = 0; i < span; ++i) acc += window[i] * fk[i];
        yr[k] = acc;
      }
    }
  }
  activate(activation_, y.values());
  return y;
}

Tensor Conv1DLayer::forward_train(const Tensor& x) {
  Tensor y = forward(x);
  input_ = x;
  output_ = y;
  cached_ = true;
  return y;
}

Tensor Conv1DLayer::backward(const Tensor& grad_out, bool param_grads) {
  require_cache("conv1d");
  if (grad_out.shape() != output_.shape()) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d gradient shape " + shape_string(grad_out.shape()));
  }
  const std::size_t batch = input_.dim(0);
  const std::size_t len = input_.dim(1);
  const std::size_t ch = input_.dim(2);
  const std::size_t nf = num_filters();
  const std::size_t span = width() * ch;
  const std::size_t out_len = output_.dim(1);

  Tensor g = grad_out;
  activation_backward(activation_, output_.values(), g.values());

  if (param_grads) {
    grads_[0].fill(0.0);
    grads_[1].fill(0.0);
  }
  Tensor dx(input_.shape());
  const double* f = params_[0].data();
  double* df = grads_[0].data();
  double* db = grads_[1].data();
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t t = 0; t < out_len; ++t) {
      const double* window = input_.data() + (n * len + t) * ch;
      double* dwindow = dx.data() + (n * len + t) * ch;
      const double* gr = g.data() + (n * out_len + t) * nf;
      for (std::size_t k = 0; k < nf; ++k) {
        const double gk = gr[k];
        if (gk == 0.0) continue;
        const double* fk = f + k * span;
        for (std::size_t i = 0; i < span; ++i) dwindow[i] += gk * fk[i];
        if (param_grads) {
          db[k] += gk;
          double* dfk = df + k * span;
          for (std::size_t i = 0; i < span; ++i) dfk[i] += gk * window[i];
        }
      }
    }
  }
  return dx;
}

std::unique_ptr<Layer> Conv1DLayer::clone() const {
  return std::make_unique<Conv1DLayer>(params_[0], params_[1], activation_);
}

// ---------------------------------------------------------------- maxpool1d

MaxPool1DLayer::MaxPool1DLayer(std::size_t window) : window_(window) {
  if (window == 0) throw Error(ErrorKind::BadDimension, "pool window must be at least 1");
}

Shape MaxPool1DLayer::output_shape(const Shape& input) const {
  if (input.size() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool1d expects (len, channels), got " +
                                              shape_string(input));
  }
  if (input[0] < window_) {
    throw Error(ErrorKind::InputTooShort, "maxpool1d input length " + std::to_string(input[0]) +
                                              " is shorter than window " +
                                              std::to_string(window_));
  }
  return {input[0] / window_, input[1]};
}

Tensor MaxPool1DLayer::pool(const Tensor& x, std::vector<std::size_t>* argmax) const {
  if (x.rank() != 3) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool1d expects (batch, len, channels), got " +
                                              shape_string(x.shape()));
  }
  const Shape inner = output_shape(without_batch(x.shape()));
  const std::size_t batch = x.dim(0);
  const std::size_t len = x.dim(1);
  const std::size_t ch = x.dim(2);
  const std::size_t out_len = inner[0];
  Tensor y(with_batch(batch, inner));
  if (argmax) argmax->assign(y.size(), 0);
  for (std::size_t n = 0; n < batch; ++n) {
    for (std::size_t t = 0; t < out_len; ++t) {
      for (std::size_t c = 0; c < ch; ++c) {
        std::size_t best = (n * len + t * window_) * ch + c;
        for (std::size_t d = 1; d < window_; ++d) {
          const std::size_t idx = (n * len + t * window_ + d) * ch + c;
          if (x[idx] > x[best]) best = idx;
        }
        const std::size_t o = (n * out_len + t) * ch + c;
        y[o] = x[best];
        if (argmax) (*argmax)[o] = best;
      }
    }
  }
  return y;
}

Tensor MaxPool1DLayer::forward(const Tensor& x) const { return pool(x, nullptr); }

Tensor MaxPool1DLayer::forward_train(const Tensor& x) {
  Tensor y = pool(x, &argmax_);
  input_shape_ = x.shape();
  cached_ = true;
  return y;
}

Tensor MaxPool1DLayer::backward(const Tensor& grad_out, bool) {
  require_cache("maxpool1d");
  if (grad_out.size() != argmax_.size()) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool1d gradient shape " + shape_string(grad_out.shape()));
  }
  Tensor dx(input_shape_);
  for (std::size_t o = 0; o < argmax_.size(); ++o) dx[argmax_[o]] += grad_out[o];
  return dx;
}

std::unique_ptr<Layer> MaxPool1DLayer::clone() const { return std::make_unique<MaxPool1DLayer>(window_); }

// ---------------------------------------------------------------- flatten

Shape FlattenLayer::output_shape(const Shape& input) const { return {shape_size(input)}; }

Tensor FlattenLayer::forward(const Tensor& x) const {
  if (x.rank() < 2) throw Error(ErrorKind::ShapeMismatch, "flatten expects a batch axis");
  return x.reshaped({x.dim(0), x.size() / x.dim(0)});
}

Tensor FlattenLayer::forward_train(const Tensor& x) {
  Tensor y = forward(x);
  input_shape_ = x.shape();
  cached_ = true;
  return y;
}

Tensor FlattenLayer::backward(const Tensor& grad_out, bool) {
  require_cache("flatten");
  return grad_out.reshaped(input_shape_);
}

std::unique_ptr<Layer> FlattenLayer::clone() const { return std::make_unique<FlattenLayer>(); }

// ---------------------------------------------------------------- single-example helpers

Tensor dense_forward(const Tensor& x, const DenseLayer& layer) { return layer.forward(x); }

Tensor conv1d_forward(const Tensor& x, const Conv1DLayer& layer) {
  if (x.rank() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "conv1d_forward expects (len, channels), got " +
                                              shape_string(x.shape()));
  }
  Tensor y = layer.forward(x.reshaped({1, x.dim(0), x.dim(1)}));
  return std::move(y).reshaped({y.dim(1), y.dim(2)});
}

Tensor maxpool1d_forward(const Tensor& x, const MaxPool1DLayer& layer) {
  if (x.rank() != 2) {
    throw Error(ErrorKind::ShapeMismatch, "maxpool1d_forward expects (len, channels), got " +
                                              shape_string(x.shape()));
  }
  Tensor y = layer.forward(x.reshaped({1, x.dim(0), x.dim(1)}));
  return std::move(y).reshaped({y.dim(1), y.dim(2)});
}

}  // namespace psa
