#include "idoe/adamw.hpp"

#include <cmath>

#include "idoe/error.hpp"

namespace idoe {

AdamW::AdamW(std::size_t size, AdamWConfig config) : config_(config), m_(size, 0.0), v_(size, 0.0) {
  if (!(config.learning_rate > 0.0) || !(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.epsilon > 0.0) || !(config.weight_decay >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "AdamW hyperparameters out of range");
  }
}

void AdamW::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    throw Error(ErrorKind::LengthMismatch, "AdamW step size does not match optimizer state");
  }
  ++t_;
  const double lr = config_.learning_rate;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double bias1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step_size = lr / bias1;
  const double bias2_sqrt = std::sqrt(bias2);
  const double decay = 1.0 - lr * config_.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] *= decay;
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    const double denom = std::sqrt(v_[i]) / bias2_sqrt + config_.epsilon;
    params[i] -= step_size * m_[i] / denom;
  }
}

}  // namespace idoe
