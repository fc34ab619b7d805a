#include "psa/optimizer.hpp"

#include <cmath>

#include "psa/errors.hpp"

namespace psa {

std::string_view to_string(Algorithm a) noexcept { return a == Algorithm::sgd ? "sgd" : "adam"; }

std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept {
  if (name == "sgd") return Algorithm::sgd;
  if (name == "adam") return Algorithm::adam;
  return std::nullopt;
}

void OptimizerConfig::validate() const {
  const auto fail = [](const std::string& why) { throw Error(ErrorKind::InvalidOptimizer, why); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0,1)");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must lie in [0,1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must lie in [0,1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (batch_size == 0) fail("batch_size must be >= 1");
  if (epochs == 0) fail("epochs must be >= 1");
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(std::span<Tensor* const> params, std::span<Tensor* const> grads) {
  if (params.size() != grads.size()) {
    throw Error(ErrorKind::ShapeMismatch, std::to_string(params.size()) + " parameters but " +
                                              std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i]->shape()) {
      throw Error(ErrorKind::ShapeMismatch, "gradient " + std::to_string(i) + " has shape " +
                                                shape_string(grads[i]->shape()) + ", parameter " +
                                                shape_string(params[i]->shape()));
    }
    if (!grads[i]->all_finite()) {
      throw Error(ErrorKind::NonFiniteGradient,
                  "non-finite gradient in parameter tensor " + std::to_string(i) + " " +
                      shape_string(grads[i]->shape()) + " at step " + std::to_string(steps_ + 1));
    }
  }
  if (first_.empty()) {
    for (Tensor* p : params) {
      first_.emplace_back(p->shape());
      if (config_.algorithm == Algorithm::adam) second_.emplace_back(p->shape());
    }
  } else if (first_.size() != params.size()) {
    throw Error(ErrorKind::ShapeMismatch, "optimizer state does not match parameter list");
  } else {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (first_[i].shape() != params[i]->shape()) {
        throw Error(ErrorKind::ShapeMismatch, "optimizer state shape mismatch at tensor " +
                                                  std::to_string(i));
      }
    }
  }
  ++steps_;

  const double lr = config_.learning_rate;
  if (config_.algorithm == Algorithm::sgd) {
    const double mu = config_.momentum;
    for (std::size_t i = 0; i < params.size(); ++i) {
      double* p = params[i]->data();
      const double* g = grads[i]->data();
      double* v = first_[i].data();
      const std::size_t n = params[i]->size();
      if (mu == 0.0) {
        for (std::size_t j = 0; j < n; ++j) p[j] -= lr * g[j];
      } else {
        for (std::size_t j = 0; j < n; ++j) {
          v[j] = mu * v[j] + g[j];
          p[j] -= lr * v[j];
        }
      }
    }
    return;
  }

  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double t = static_cast<double>(steps_);
  const double correction1 = 1.0 - std::pow(b1, t);
  const double correction2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i]->data();
    const double* g = grads[i]->data();
    double* m = first_[i].data();
    double* v = second_[i].data();
    const std::size_t n = params[i]->size();
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace psa
