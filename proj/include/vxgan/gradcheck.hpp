#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "vxgan/tensor.hpp"

namespace vxgan {

struct GradCheckOptions {
  double eps = 1e-5;
  /// Check at most this many coordinates per tensor (0 = all), chosen by `seed`.
  Index max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
  /// A coordinate whose error exceeds `retry_above` is re-measured with steps
  /// eps/10, eps/100, ... (up to `kink_retries` times) and keeps the best
  /// agreement. This separates an activation kink inside [p-eps, p+eps] from a
  /// wrong gradient, which disagrees at every step.
  int kink_retries = 2;
  double retry_above = 1e-6;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_param;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  Index coords_checked = 0;
  Index coords_refined = 0;  // coordinates that needed a smaller step
};

/// Relative error used by the checker: |a - b| / max(|a|, |b|, 1e-8).
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of `forward(params)` against central
/// differences (f(p+eps) - f(p-eps)) / 2eps. Leaves `params` values unchanged
/// and their grads holding the analytic gradient.
GradCheckResult grad_check(const std::function<Tensor(const ParamSet&)>& forward, ParamSet& params,
                           const GradCheckOptions& options = {});

}  // namespace vxgan
