#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psa/tensor.hpp"

namespace psa {

enum class Activation { linear, relu, sigmoid };

std::string_view to_string(Activation a) noexcept;
std::optional<Activation> parse_activation(std::string_view name) noexcept;

/// One stage of a feed-forward network. Every tensor that flows through a
/// layer carries a leading batch axis.
///
/// `forward` is pure and may run concurrently on a shared instance.
/// `forward_train` additionally caches what `backward` needs; `backward`
/// consumes that cache, so each backward call needs its own forward_train.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual std::string_view kind() const noexcept = 0;
  /// Per-example output shape for a per-example input shape.
  virtual Shape output_shape(const Shape& input) const = 0;

  virtual Tensor forward(const Tensor& x) const = 0;
  virtual Tensor forward_train(const Tensor& x) = 0;
  /// Returns dL/dx. Parameter gradients are written (not accumulated) when
  /// `param_grads` is set.
  virtual Tensor backward(const Tensor& grad_out, bool param_grads = true) = 0;

  virtual std::span<Tensor> parameters() noexcept { return {}; }
  virtual std::span<Tensor> gradients() noexcept { return {}; }
  virtual std::span<const Tensor> parameters() const noexcept { return {}; }

  virtual std::unique_ptr<Layer> clone() const = 0;

  bool has_cache() const noexcept { return cached_; }
  void drop_cache() noexcept { cached_ = false; }

 protected:
  void require_cache(std::string_view who);
  bool cached_ = false;
};

/// Fully connected layer: out[n,j] = act(b[j] + sum_i x[n,i] * W[i,j]).
class DenseLayer final : public Layer {
 public:
  DenseLayer(std::size_t in, std::size_t out, Activation activation);
  DenseLayer(Tensor weights, Tensor bias, Activation activation);

  std::string_view kind() const noexcept override { return "dense"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x) const override;
  Tensor forward_train(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool param_grads = true) override;
  std::span<Tensor> parameters() noexcept override { return params_; }
  std::span<Tensor> gradients() noexcept override { return grads_; }
  std::span<const Tensor> parameters() const noexcept override { return params_; }
  std::unique_ptr<Layer> clone() const override;

  std::size_t in() const noexcept { return params_[0].dim(0); }
  std::size_t out() const noexcept { return params_[0].dim(1); }
  Activation activation() const noexcept { return activation_; }
  const Tensor& weights() const noexcept { return params_[0]; }
  const Tensor& bias() const noexcept { return params_[1]; }

 private:
  Tensor params_[2];  // W (in, out), b (out)
  Tensor grads_[2];
  Activation activation_;
  Tensor input_;
  Tensor output_;
};

/// Valid, stride-1 cross-correlation over the length axis.
/// Input (batch, len, in_channels) -> (batch, len - width + 1, num_filters).
class Conv1DLayer final : public Layer {
 public:
  Conv1DLayer(std::size_t num_filters, std::size_t width, std::size_t in_channels,
              Activation activation = Activation::relu);
  Conv1DLayer(Tensor filters, Tensor bias, Activation activation = Activation::relu);

  std::string_view kind() const noexcept override { return "conv1d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x) const override;
  Tensor forward_train(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool param_grads = true) override;
  std::span<Tensor> parameters() noexcept override { return params_; }
  std::span<Tensor> gradients() noexcept override { return grads_; }
  std::span<const Tensor> parameters() const noexcept override { return params_; }
  std::unique_ptr<Layer> clone() const override;

  std::size_t num_filters() const noexcept { return params_[0].dim(0); }
  std::size_t width() const noexcept { return params_[0].dim(1); }
  std::size_t in_channels() const noexcept { return params_[0].dim(2); }
  Activation activation() const noexcept { return activation_; }

 private:
  void check_input(const Tensor& x) const;

  Tensor params_[2];  // filters (num_filters, width, in_channels), bias (num_filters)
  Tensor grads_[2];
  Activation activation_;
  Tensor input_;
  Tensor output_;
};

/// Non-overlapping max pooling (stride = window); a trailing remainder
/// shorter than the window is dropped. Ties route to the lowest index.
class MaxPool1DLayer final : public Layer {
 public:
  explicit MaxPool1DLayer(std::size_t window);

  std::string_view kind() const noexcept override { return "maxpool1d"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x) const override;
  Tensor forward_train(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool param_grads = true) override;
  std::unique_ptr<Layer> clone() const override;

  std::size_t window() const noexcept { return window_; }
  std::size_t stride() const noexcept { return window_; }

 private:
  Tensor pool(const Tensor& x, std::vector<std::size_t>* argmax) const;

  std::size_t window_;
  Shape input_shape_;
  std::vector<std::size_t> argmax_;
};

/// (batch, d1, d2, ...) -> (batch, d1*d2*...).
class FlattenLayer final : public Layer {
 public:
  std::string_view kind() const noexcept override { return "flatten"; }
  Shape output_shape(const Shape& input) const override;
  Tensor forward(const Tensor& x) const override;
  Tensor forward_train(const Tensor& x) override;
  Tensor backward(const Tensor& grad_out, bool param_grads = true) override;
  std::unique_ptr<Layer> clone() const override;

 private:
  Shape input_shape_;
};

// Single-example entry points: dense takes (batch, in); conv and pool take
// (len, channels) without a batch axis.
Tensor dense_forward(const Tensor& x, const DenseLayer& layer);
Tensor conv1d_forward(const Tensor& x, const Conv1DLayer& layer);
Tensor maxpool1d_forward(const Tensor& x, const MaxPool1DLayer& layer);

}  // namespace psa
