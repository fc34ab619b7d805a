#pragma once

// Finite-difference gradient checking and random small networks, shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "psa/layers.hpp"
#include "psa/network.hpp"
#include "psa/rng.hpp"

namespace psa::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

inline double loss_of(const Network& net, const Tensor& x, const LossTarget& target) {
  return loss_and_grad(net.forward(x), target).loss;
}

// Relative error |a - n| / max(|a|, |n|); pairs where both sides are below
// `floor` are compared absolutely against it instead.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < floor) return std::abs(analytic - numeric) / floor;
  return std::abs(analytic - numeric) / scale;
}

inline GradCheckResult grad_check(Network& net, const Tensor& x, const LossTarget& target,
                                  double h = 1e-5) {
  const Tensor out = net.forward_train(x);
  backward(net, out, target);
  std::vector<Tensor> analytic;
  for (Tensor* g : net.gradients()) analytic.push_back(*g);

  GradCheckResult result;
  auto params = net.parameters();
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      w[i] = saved + h;
      const double up = loss_of(net, x, target);
      w[i] = saved - h;
      const double down = loss_of(net, x, target);
      w[i] = saved;
      const double numeric = (up - down) / (2 * h);
      result.max_rel_error = std::max(result.max_rel_error, relative_error(analytic[p][i], numeric));
      ++result.checked;
    }
  }
  return result;
}

inline void randomize(Network& net, Xoshiro256& rng, double scale = 0.5) {
  for (Tensor* t : net.parameters()) {
    for (double& v : t->values()) v = rng.uniform(-scale, scale);
  }
}

inline Tensor random_tensor(Shape shape, Xoshiro256& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

struct GradCase {
  std::string name;
  Network net;
  Tensor input;
  std::vector<std::size_t> labels;
  Tensor reference;
  bool reconstruction = false;

  LossTarget target() const {
    return reconstruction ? LossTarget::reconstruction(reference) : LossTarget::classes(labels);
  }
};

// Variant `i` cycles through dense classifiers, dense autoencoders and
// conv/pool stacks so that every layer kind and both losses are covered.
inline GradCase random_case(std::size_t i, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  GradCase c;
  const std::size_t batch = 1 + rng.below(3);
  const auto pick = [&](std::size_t lo, std::size_t hi) { return lo + rng.below(hi - lo + 1); };
  const Activation acts[] = {Activation::relu, Activation::sigmoid, Activation::linear};
  const auto act = [&] { return acts[rng.below(3)]; };

  switch (i % 4) {
    case 0: {  // dense classifier
      const std::size_t in = pick(2, 6), hidden = pick(2, 6), k = pick(2, 4);
      c.name = "dense-softmax";
      c.net.emplace<DenseLayer>(in, hidden, act());
      c.net.emplace<DenseLayer>(hidden, k, Activation::linear);
      c.input = random_tensor({batch, in}, rng);
      for (std::size_t n = 0; n < batch; ++n) c.labels.push_back(rng.below(k));
      break;
    }
    case 1: {  // dense autoencoder
      const std::size_t in = pick(3, 6), wide = pick(4, 7), code = pick(1, 3);
      c.name = "autoencoder-mse";
      c.net.emplace<DenseLayer>(in, wide, act());
      c.net.emplace<DenseLayer>(wide, code, act());
      c.net.emplace<DenseLayer>(code, wide, act());
      c.net.emplace<DenseLayer>(wide, in, Activation::linear);
      c.input = random_tensor({batch, in}, rng);
      c.reference = c.input;
      c.reconstruction = true;
      break;
    }
    case 2: {  // conv -> pool -> flatten -> dense
      const std::size_t len = pick(5, 9), ch = pick(1, 3), filters = pick(1, 3), width = pick(1, 3);
      const std::size_t window = pick(1, 2);
      c.name = "conv-pool-softmax";
      c.net.emplace<Conv1DLayer>(filters, width, ch, act());
      c.net.emplace<MaxPool1DLayer>(window);
      c.net.emplace<FlattenLayer>();
      const Shape flat = c.net.output_shape({len, ch});
      c.net.emplace<DenseLayer>(flat[0], 2, Activation::linear);
      c.input = random_tensor({batch, len, ch}, rng);
      for (std::size_t n = 0; n < batch; ++n) c.labels.push_back(rng.below(2));
      break;
    }
    default: {  // two conv/pool stages, as in the CNN preset
      const std::size_t len = pick(8, 12), ch = pick(2, 3), filters = pick(2, 3);
      c.name = "cnn-two-stage";
      c.net.emplace<Conv1DLayer>(filters, 2, ch, Activation::relu);
      c.net.emplace<MaxPool1DLayer>(2);
      c.net.emplace<Conv1DLayer>(filters, 2, filters, Activation::relu);
      c.net.emplace<MaxPool1DLayer>(2);
      c.net.emplace<FlattenLayer>();
      const Shape flat = c.net.output_shape({len, ch});
      c.net.emplace<DenseLayer>(flat[0], 4, Activation::relu);
      c.net.emplace<DenseLayer>(4, 2, Activation::linear);
      c.input = random_tensor({batch, len, ch}, rng);
      for (std::size_t n = 0; n < batch; ++n) c.labels.push_back(rng.below(2));
      break;
    }
  }
  randomize(c.net, rng);
  return c;
}

}  // namespace psa::testing
