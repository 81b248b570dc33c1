#include "evoshift/optim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "evoshift/error.hpp"

namespace evoshift {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Adam: return "adam";
    case OptimizerKind::RmsProp: return "rmsprop";
    case OptimizerKind::AdaBound: return "adabound";
  }
  return "?";
}

OptimizerKind parse_optimizer(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "sgd") return OptimizerKind::Sgd;
  if (lower == "adam") return OptimizerKind::Adam;
  if (lower == "rmsprop") return OptimizerKind::RmsProp;
  if (lower == "adabound") return OptimizerKind::AdaBound;
  throw Error(ErrorCode::InvalidConfig, "unknown optimizer '" + std::string(name) + "'");
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig cfg;
  cfg.kind = kind;
  switch (kind) {
    case OptimizerKind::Sgd:
      cfg.learning_rate = 0.01;
      cfg.momentum = 0.9;
      break;
    case OptimizerKind::Adam:
    case OptimizerKind::RmsProp:
    case OptimizerKind::AdaBound:
      cfg.learning_rate = 0.001;
      break;
  }
  return cfg;
}

void OptimizerConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) fail("momentum must lie in [0,1)");
  if (!(beta1 > 0.0 && beta1 < 1.0)) fail("beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) fail("beta2 must lie in (0,1)");
  if (!(decay > 0.0 && decay < 1.0)) fail("decay must lie in (0,1)");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  if (!(final_lr > 0.0)) fail("final_lr must be positive");
}

StepBounds adabound_bounds(const OptimizerConfig& cfg, std::uint64_t t) {
  const double scaled = (1.0 - cfg.beta2) * static_cast<double>(t);
  return {cfg.final_lr * (1.0 - 1.0 / (scaled + 1.0)), cfg.final_lr * (1.0 + 1.0 / scaled)};
}

void step(std::span<double> params, std::span<const double> grads, OptimizerState& state,
          const OptimizerConfig& cfg) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw Error(ErrorCode::LengthMismatch, "params, grads and optimizer state differ in length");
  const std::uint64_t t = ++state.step_count;
  auto& m = state.first_moment;
  auto& v = state.second_moment;
  const double lr = cfg.learning_rate;

  switch (cfg.kind) {
    case OptimizerKind::Sgd:
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.momentum * m[i] - lr * grads[i];
        params[i] += m[i];
      }
      break;
    case OptimizerKind::Adam: {
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg.epsilon);
      }
      break;
    }
    case OptimizerKind::RmsProp:
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = cfg.decay * v[i] + (1.0 - cfg.decay) * grads[i] * grads[i];
        params[i] -= lr * grads[i] / (std::sqrt(v[i]) + cfg.epsilon);
      }
      break;
    case OptimizerKind::AdaBound: {
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
      const double step_size = lr * std::sqrt(c2) / c1;
      const auto bounds = adabound_bounds(cfg, t);
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double rate = std::clamp(step_size / (std::sqrt(v[i]) + cfg.epsilon), bounds.lower, bounds.upper);
        params[i] -= rate * m[i];
      }
      break;
    }
  }
}

}  // namespace evoshift
