#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "psa/tensor.hpp"

namespace psa {

enum class Algorithm { sgd, adam };

std::string_view to_string(Algorithm a) noexcept;
std::optional<Algorithm> parse_algorithm(std::string_view name) noexcept;

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::adam;
  double learning_rate = 1e-3;
  double momentum = 0.0;  // sgd only
  double beta1 = 0.9;     // adam only
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidOptimizer) on any out-of-range field.
  void validate() const;
};

/// Holds per-parameter optimizer state (momentum buffers, Adam moments).
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  /// Applies one update in place. All gradients are checked for finiteness
  /// before any parameter is touched.
  void step(std::span<Tensor* const> params, std::span<Tensor* const> grads);

  std::size_t steps() const noexcept { return steps_; }
  const OptimizerConfig& config() const noexcept { return config_; }

 private:
  OptimizerConfig config_;
  std::size_t steps_ = 0;
  std::vector<Tensor> first_;   // momentum buffer / Adam first moment
  std::vector<Tensor> second_;  // Adam second moment
};

}  // namespace psa
