#include "vxgan/losses.hpp"

#include <cmath>

namespace vxgan {
namespace {

void require_same(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeMismatch(std::string(what) + ": shapes " + shape_string(a.shape()) + " and " +
                        shape_string(b.shape()));
}

}  // namespace

Tensor bce_loss(const Tensor& logit, int label) {
  if (logit.size() != 1) throw ShapeMismatch("bce_loss: logit must be a scalar");
  if (label != 0 && label != 1) throw Error("bce_loss: label must be 0 or 1");
  const double d = logit.item();
  const double softplus = std::max(d, 0.0) + std::log1p(std::exp(-std::abs(d)));
  const double y = static_cast<double>(label);
  const double prob = d >= 0.0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
  return Tensor::make_result({1}, Array::Constant(1, softplus - y * d), {logit},
                             [prob, y](const Array& g, std::span<Array* const> s) {
                               (*s[0])[0] += g[0] * (prob - y);
                             });
}

Tensor l1_pixel_loss(const Tensor& a, const Tensor& b) {
  require_same(a, b, "l1_pixel_loss");
  const Array diff = a.value() - b.value();
  return Tensor::make_result({1}, Array::Constant(1, diff.abs().sum()), {a, b},
                             [diff](const Array& g, std::span<Array* const> s) {
                               const Array sign = (diff > 0.0).cast<double>() - (diff < 0.0).cast<double>();
                               if (s[0]) *s[0] += g[0] * sign;
                               if (s[1]) *s[1] -= g[0] * sign;
                             });
}

Tensor mse_loss(const Tensor& a, const Tensor& b) {
  require_same(a, b, "mse_loss");
  const Array diff = a.value() - b.value();
  const double n = static_cast<double>(diff.size());
  return Tensor::make_result({1}, Array::Constant(1, diff.square().sum() / n), {a, b},
                             [diff, n](const Array& g, std::span<Array* const> s) {
                               if (s[0]) *s[0] += (2.0 * g[0] / n) * diff;
                               if (s[1]) *s[1] -= (2.0 * g[0] / n) * diff;
                             });
}

Tensor pixel_loss(PixelLoss kind, const Tensor& a, const Tensor& b) {
  return kind == PixelLoss::L1 ? l1_pixel_loss(a, b) : mse_loss(a, b);
}

}  // namespace vxgan
