#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoshift {

enum class OptimizerKind { Sgd, Adam, RmsProp, AdaBound };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 0.001;
  double momentum = 0.0;   // SGD
  double beta1 = 0.9;      // ADAM, AdaBound
  double beta2 = 0.999;    // ADAM, AdaBound
  double decay = 0.9;      // RMSProp
  double epsilon = 1e-8;
  double final_lr = 0.1;   // AdaBound

  /// Defaults published with each method.
  static OptimizerConfig defaults(OptimizerKind kind);

  /// Throws InvalidConfig when a hyperparameter is out of range.
  void validate() const;
};

struct OptimizerState {
  std::uint64_t step_count = 0;
  std::vector<double> first_moment;   // SGD velocity, ADAM/AdaBound m
  std::vector<double> second_moment;  // ADAM/AdaBound/RMSProp v

  explicit OptimizerState(std::size_t n = 0) : first_moment(n, 0.0), second_moment(n, 0.0) {}
};

/// AdaBound per-coordinate learning-rate clip interval at step t >= 1.
struct StepBounds {
  double lower;
  double upper;
};
StepBounds adabound_bounds(const OptimizerConfig& cfg, std::uint64_t t);

/// One deterministic in-place update of `params`; increments state.step_count.
void step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
          const OptimizerConfig& cfg);

}  // namespace evoshift
