#include "psa/network.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "psa/errors.hpp"

namespace psa {

Network::Network(const Network& other) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

void Network::add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

Shape Network::output_shape(const Shape& input, std::size_t count) const {
  Shape s = input;
  const std::size_t n = std::min(count, layers_.size());
  for (std::size_t i = 0; i < n; ++i) s = layers_[i]->output_shape(s);
  return s;
}

Tensor Network::forward(const Tensor& x) const { return forward_prefix(x, layers_.size()); }

Tensor Network::forward_prefix(const Tensor& x, std::size_t count) const {
  if (count > layers_.size()) throw Error(ErrorKind::ShapeMismatch, "prefix longer than network");
  if (count == 0) return x;
  Tensor h = layers_[0]->forward(x);
  for (std::size_t i = 1; i < count; ++i) h = layers_[i]->forward(h);
  return h;
}

Tensor Network::forward_train(const Tensor& x) {
  if (layers_.empty()) return x;
  Tensor h = layers_[0]->forward_train(x);
  for (std::size_t i = 1; i < layers_.size(); ++i) h = layers_[i]->forward_train(h);
  return h;
}

void Network::backward(const Tensor& grad_out, std::size_t first_trainable) {
  Tensor g = grad_out;
  for (std::size_t i = layers_.size(); i-- > first_trainable;) {
    g = layers_[i]->backward(g, true);
  }
  // Frozen layers keep their caches from forward_train; clear them so a
  // stray backward cannot reuse them.
  for (std::size_t i = 0; i < std::min(first_trainable, layers_.size()); ++i) {
    layers_[i]->drop_cache();
  }
}

std::vector<Tensor*> Network::parameters(std::size_t first_layer) {
  std::vector<Tensor*> out;
  for (std::size_t i = first_layer; i < layers_.size(); ++i) {
    for (Tensor& t : layers_[i]->parameters()) out.push_back(&t);
  }
  return out;
}

std::vector<const Tensor*> Network::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    for (const Tensor& t : std::as_const(*l).parameters()) out.push_back(&t);
  }
  return out;
}

std::vector<Tensor*> Network::gradients(std::size_t first_layer) {
  std::vector<Tensor*> out;
  for (std::size_t i = first_layer; i < layers_.size(); ++i) {
    for (Tensor& t : layers_[i]->gradients()) out.push_back(&t);
  }
  return out;
}

std::size_t Network::parameter_offset(std::size_t first_layer) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < std::min(first_layer, layers_.size()); ++i) {
    n += std::as_const(*layers_[i]).parameters().size();
  }
  return n;
}

void Network::drop_caches() noexcept {
  for (auto& l : layers_) l->drop_cache();
}

Tensor softmax(const Tensor& logits) {
  if (logits.rank() != 2 || logits.dim(1) < 2) {
    throw Error(ErrorKind::ShapeMismatch, "softmax expects (batch, k>=2), got " +
                                              shape_string(logits.shape()));
  }
  if (!logits.all_finite()) throw Error(ErrorKind::NonFiniteInput, "softmax input is not finite");
  const std::size_t k = logits.dim(1);
  Tensor p(logits.shape());
  for (std::size_t n = 0; n < logits.dim(0); ++n) {
    const double* z = logits.data() + n * k;
    double* out = p.data() + n * k;
    const double m = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = std::exp(z[j] - m);
      sum += out[j];
    }
    for (std::size_t j = 0; j < k; ++j) out[j] /= sum;
  }
  return p;
}

double cross_entropy(const Tensor& probs, std::span<const std::size_t> targets) {
  if (probs.rank() != 2 || probs.dim(0) != targets.size()) {
    throw Error(ErrorKind::ShapeMismatch, "cross_entropy: " + std::to_string(targets.size()) +
                                              " targets for probabilities " +
                                              shape_string(probs.shape()));
  }
  const std::size_t k = probs.dim(1);
  double total = 0.0;
  for (std::size_t n = 0; n < targets.size(); ++n) {
    if (targets[n] >= k) {
      throw Error(ErrorKind::ShapeMismatch, "target class " + std::to_string(targets[n]) +
                                                " out of range");
    }
    total -= std::log(std::max(probs.at(n, targets[n]), kProbabilityFloor));
  }
  return total / static_cast<double>(targets.size());
}

double mse(const Tensor& x, const Tensor& x_hat) {
  if (x.shape() != x_hat.shape()) {
    throw Error(ErrorKind::ShapeMismatch, "mse of " + shape_string(x.shape()) + " vs " +
                                              shape_string(x_hat.shape()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - x_hat[i];
    total += d * d;
  }
  return total / static_cast<double>(x.size());
}

LossAndGrad loss_and_grad(const Tensor& output, const LossTarget& target) {
  if (target.kind == LossKind::cross_entropy) {
    Tensor probs = softmax(output);
    const double loss = cross_entropy(probs, target.labels);
    // d/dz of mean CE through softmax is (p - onehot) / batch; the floor is
    // inactive whenever p is a softmax output of finite logits, apart from
    // underflow which this gradient ignores.
    const double scale = 1.0 / static_cast<double>(target.labels.size());
    const std::size_t k = probs.dim(1);
    for (std::size_t n = 0; n < target.labels.size(); ++n) {
      probs[n * k + target.labels[n]] -= 1.0;
    }
    for (double& g : probs.values()) g *= scale;
    return {loss, std::move(probs)};
  }
  if (target.reference == nullptr) throw Error(ErrorKind::ShapeMismatch, "missing reconstruction target");
  const Tensor& ref = *target.reference;
  const double loss = mse(ref, output);
  Tensor grad(output.shape());
  const double scale = 2.0 / static_cast<double>(output.size());
  for (std::size_t i = 0; i < output.size(); ++i) grad[i] = scale * (output[i] - ref[i]);
  return {loss, std::move(grad)};
}

double backward(Network& net, const Tensor& output, const LossTarget& target,
                std::size_t first_trainable) {
  auto [loss, grad] = loss_and_grad(output, target);
  net.backward(grad, first_trainable);
  return loss;
}

}  // namespace psa
