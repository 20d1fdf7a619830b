#pragma once

#include "vxgan/tensor.hpp"

namespace vxgan {

enum class PixelLoss { L1, Mse };

/// Binary cross-entropy on a pre-sigmoid logit: softplus(d) - label*d.
/// Label 1 marks real data, 0 marks generator output.
Tensor bce_loss(const Tensor& logit, int label);

/// Sum of absolute differences. Subgradient 0 where a == b.
Tensor l1_pixel_loss(const Tensor& a, const Tensor& b);

/// Mean of squared differences.
Tensor mse_loss(const Tensor& a, const Tensor& b);

Tensor pixel_loss(PixelLoss kind, const Tensor& a, const Tensor& b);

}  // namespace vxgan
