#pragma once

#include <array>
#include <random>
#include <span>
#include <vector>

#include "vxgan/tensor.hpp"

namespace vxgan {

using Rng = std::mt19937_64;

/// In-plane (H, W) padding for 3D convolutions. `Same` zero-pads so the
/// in-plane extent is preserved (odd kernels only); depth is always valid.
enum class Padding { Valid, Same };

// Convolutions are cross-correlations (no kernel flip).

/// input [C_in,H,W], kernel [C_out,C_in,kh,kw], bias [C_out] -> [C_out,H-kh+1,W-kw+1]
Tensor conv2d_valid(const Tensor& input, const Tensor& kernel, const Tensor& bias);

/// input [C_in,D,H,W], kernel [C_out,C_in,kd,kh,kw], bias [C_out]
Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              Padding padding_hw = Padding::Valid);

inline Tensor conv3d_valid(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  return conv3d(input, kernel, bias, Padding::Valid);
}

/// Gradient-of-convolution upsampling. input [C_in,D,H,W], kernel [C_in,C_out,kd,kh,kw].
/// Output depth (D-1)*sd + kd; in-plane (H-1)*sh + kh for Valid, H*sh for Same.
Tensor conv3d_transposed(const Tensor& input, const Tensor& kernel, std::array<Index, 3> stride,
                         Padding padding_hw = Padding::Valid);

/// 2x2 window, stride 2, floor on odd extents. Ties route the gradient to the
/// first element in scan order.
Tensor maxpool2d(const Tensor& input);

/// input [N], weight [M,N], bias [M] -> [M]
Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& t);
Tensor sigmoid(const Tensor& t);
/// Inverted dropout: kept units are scaled by 1/(1-p). Identity when !training or p == 0.
Tensor dropout(const Tensor& t, double p, Rng& rng, bool training);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& t, double factor);
Tensor sum(const Tensor& t);
/// Sum of a list of same-shape tensors.
Tensor add_n(std::span<const Tensor> terms);

Tensor reshape(const Tensor& t, Shape shape);
/// Sub-block [start, start+extent) along every axis.
Tensor crop(const Tensor& t, std::span<const Index> start, std::span<const Index> extent);
/// Symmetric margin removal; an odd surplus is taken from the high-index side.
Tensor center_crop(const Tensor& t, const Shape& target);
/// Flattens every input and concatenates into one rank-1 tensor.
Tensor concat(std::span<const Tensor> parts);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& t) { return scale(t, s); }

}  // namespace vxgan
