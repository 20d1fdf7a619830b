#include "vxgan/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace vxgan {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

GradCheckResult grad_check(const std::function<Tensor(const ParamSet&)>& forward, ParamSet& params,
                           const GradCheckOptions& options) {
  params.zero_grad();
  backward(forward(params));

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (auto& [name, tensor] : params) {
    if (!tensor.has_grad()) throw MissingGradient("grad_check: '" + name + "' unreachable from the loss");
    const Array analytic = tensor.grad();

    std::vector<Index> coords(static_cast<std::size_t>(tensor.size()));
    std::iota(coords.begin(), coords.end(), Index{0});
    if (options.max_coords_per_tensor > 0 && tensor.size() > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(static_cast<std::size_t>(options.max_coords_per_tensor));
      std::sort(coords.begin(), coords.end());
    }

    Array& values = tensor.mutable_value();
    auto central = [&](Index i, double step) {
      const double saved = values[i];
      values[i] = saved + step;
      const double plus = forward(params).item();
      values[i] = saved - step;
      const double minus = forward(params).item();
      values[i] = saved;
      return (plus - minus) / (2.0 * step);
    };
    for (Index i : coords) {
      double numeric = central(i, options.eps);
      double err = relative_error(analytic[i], numeric);
      double step = options.eps;
      for (int retry = 0; retry < options.kink_retries && err > options.retry_above; ++retry) {
        step /= 10.0;
        const double finer = central(i, step);
        const double finer_err = relative_error(analytic[i], finer);
        if (finer_err < err) numeric = finer, err = finer_err;
      }
      if (step != options.eps) ++result.coords_refined;
      ++result.coords_checked;
      if (err > result.max_relative_error || result.worst_index < 0) {
        result.max_relative_error = std::max(err, result.max_relative_error);
        if (err >= result.max_relative_error) {
          result.worst_param = name;
          result.worst_index = i;
          result.worst_analytic = analytic[i];
          result.worst_numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace vxgan
