#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "psa/layers.hpp"
#include "psa/tensor.hpp"

namespace psa {

/// Ordered stack of layers. Copying deep-copies every layer (parameters
/// included, caches excluded).
class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) noexcept = default;
  Network& operator=(Network&&) noexcept = default;

  void add(std::unique_ptr<Layer> layer);
  template <typename L, typename... Args>
  L& emplace(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    add(std::move(layer));
    return ref;
  }

  std::size_t size() const noexcept { return layers_.size(); }
  Layer& layer(std::size_t i) { return *layers_.at(i); }
  const Layer& layer(std::size_t i) const { return *layers_.at(i); }

  /// Per-example output shape of the first `count` layers (all by default).
  Shape output_shape(const Shape& input, std::size_t count = static_cast<std::size_t>(-1)) const;

  Tensor forward(const Tensor& x) const;
  /// Runs only layers [0, count).
  Tensor forward_prefix(const Tensor& x, std::size_t count) const;
  Tensor forward_train(const Tensor& x);

  /// Back-propagates dL/d(output). Layers before `first_trainable` receive no
  /// parameter gradients and back-propagation stops at them.
  void backward(const Tensor& grad_out, std::size_t first_trainable = 0);

  std::vector<Tensor*> parameters(std::size_t first_layer = 0);
  std::vector<const Tensor*> parameters() const;
  std::vector<Tensor*> gradients(std::size_t first_layer = 0);

  /// Number of leading layers `parameters(first_layer)` skips, as a count of
  /// parameter tensors.
  std::size_t parameter_offset(std::size_t first_layer) const;

  void drop_caches() noexcept;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Row-wise softmax with max subtraction.
Tensor softmax(const Tensor& logits);

/// Mean of -ln(max(p[n, target_n], 1e-12)).
double cross_entropy(const Tensor& probs, std::span<const std::size_t> targets);

/// Mean squared difference over all components.
double mse(const Tensor& x, const Tensor& x_hat);

inline constexpr double kProbabilityFloor = 1e-12;

enum class LossKind { cross_entropy, mse };

/// What the network output is scored against. Classification scores
/// softmax(output) against class indices; reconstruction scores the raw
/// output against a reference tensor of the same shape.
struct LossTarget {
  LossKind kind = LossKind::cross_entropy;
  std::span<const std::size_t> labels;
  const Tensor* reference = nullptr;

  static LossTarget classes(std::span<const std::size_t> labels) {
    return {LossKind::cross_entropy, labels, nullptr};
  }
  static LossTarget reconstruction(const Tensor& reference) {
    return {LossKind::mse, {}, &reference};
  }
};

struct LossAndGrad {
  double loss;
  Tensor grad;  // dL/d(network output)
};

LossAndGrad loss_and_grad(const Tensor& output, const LossTarget& target);

/// Computes the loss for `output` (the result of the preceding
/// forward_train on `net`) and back-propagates it into every trainable
/// parameter's gradient. Returns the loss.
double backward(Network& net, const Tensor& output, const LossTarget& target,
                std::size_t first_trainable = 0);

}  // namespace psa
