#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace idoe {

struct AdamWConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

/// Adam with decoupled weight decay. Follows the reference PyTorch update
/// order: decay the parameters by lr * wd, update the moments with the raw
/// gradient, then apply the bias-corrected step.
class AdamW {
 public:
  AdamW(std::size_t size, AdamWConfig config);

  void step(std::span<double> params, std::span<const double> grad);

  std::size_t steps() const { return t_; }
  const AdamWConfig& config() const { return config_; }
  std::span<const double> first_moment() const { return m_; }
  std::span<const double> second_moment() const { return v_; }

 private:
  AdamWConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

}  // namespace idoe
