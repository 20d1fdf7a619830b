#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "vxgan/tensor.hpp"

namespace vxgan {

struct AdamConfig {
  double learning_rate = 0.002;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// ADAM with bias-corrected moments. Moment buffers are keyed by parameter
/// name and created lazily (zero-initialized) on the first step.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig config) : config_(config) {}

  /// One update of every parameter from its current grad. Grads are left
  /// untouched; the caller zeroes them. Throws MissingGradient before
  /// modifying anything if some parameter has no grad.
  void step(ParamSet& params);

  const AdamConfig& config() const { return config_; }
  void set_config(const AdamConfig& config) { config_ = config; }
  std::uint64_t timestep() const { return t_; }

  const std::map<std::string, Array>& first_moments() const { return m_; }
  const std::map<std::string, Array>& second_moments() const { return v_; }
  /// Restores serialized state (see checkpoint.hpp).
  void restore(std::map<std::string, Array> m, std::map<std::string, Array> v, std::uint64_t t);

 private:
  AdamConfig config_;
  std::map<std::string, Array> m_;
  std::map<std::string, Array> v_;
  std::uint64_t t_ = 0;
};

/// p <- p - learning_rate * grad(p)
void sgd_step(ParamSet& params, double learning_rate);

}  // namespace vxgan
