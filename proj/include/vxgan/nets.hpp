#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vxgan/ops.hpp"
#include "vxgan/tensor.hpp"
#include "vxgan/volume.hpp"

namespace vxgan {

enum class NetType { InterpGen, AlignGen, SrGen, Discriminator };

const char* net_type_name(NetType type);

/// One parameterized (or pooling/dropout) stage of a network.
struct LayerSpec {
  enum class Op { Conv2d, Conv3d, ConvTranspose3d, MaxPool2d, Dropout, Dense };

  std::string name;  // parameter prefix ("<name>.weight", "<name>.bias"); empty when parameter-free
  Op op = Op::Conv3d;
  Index in_channels = 0;
  Index out_channels = 0;
  std::array<Index, 3> kernel{1, 1, 1};  // (kd, kh, kw); conv2d uses kd = 1
  std::array<Index, 3> stride{1, 1, 1};
  Padding padding = Padding::Valid;
  bool pre_relu = false;   // activation applied to the layer's input
  bool post_relu = false;  // activation applied to the layer's output
  int residual_module = -1;
  bool has_bias = true;
  bool zero_init = false;

  Shape weight_shape() const;
  Index parameter_count() const;
};

struct LayerPlan {
  NetType type = NetType::InterpGen;
  std::vector<LayerSpec> layers;

  Index parameter_count() const;
  /// Number of convolutions whose in-plane kernel is 3x3.
  Index count_3x3_convs() const;
  std::string describe() const;
};

struct Network {
  LayerPlan plan;
  ParamSet params;
};

struct GeneratorOptions {
  Index width = 50;  // hidden feature maps
};

struct DiscriminatorOptions {
  int n_slices = 2;
  PatchSize input{};
  Index channels = 32;
  Index hidden = 256;
  double dropout = 0.5;
};

// Builders are pure functions of (options, seed). Hidden kernels are He-normal,
// biases zero, generator output layers all zero.
Network build_interp_generator(std::uint64_t seed, GeneratorOptions options = {});
Network build_align_generator(std::uint64_t seed, GeneratorOptions options = {});
Network build_sr_generator(std::uint64_t seed, GeneratorOptions options = {});
Network build_discriminator(std::uint64_t seed, DiscriminatorOptions options);

// Output extents. Inputs below the minimum throw InputTooSmall.
inline constexpr Index kInterpMargin = 11;  // per side, in-plane
inline constexpr Index kAlignMargin = 6;    // per side, every axis
inline constexpr Index kSrMargin = kSrDepthMargin;  // per side before upsampling
PatchSize interp_output_size(PatchSize input);
Dims align_output_dims(Dims input);
Dims sr_output_dims(Dims input);
/// Per-side extent after the discriminator's three conv-pool stages (0 if it does not survive).
Index discriminator_tower_extent(Index input);
/// Smallest square input the discriminator accepts.
Index discriminator_min_input();

/// Predicts section k from k-1 and k+1. Returns [1, H-22, W-22].
Tensor forward_interp(const ParamSet& params, const Image& below, const Image& above);
/// Returns [1, Z-12, Y-12, X-12].
Tensor forward_align(const ParamSet& params, const Tensor& stack);
Tensor forward_align(const ParamSet& params, const Volume& stack);
/// Returns [1, 2(Z-14), Y-14, X-14].
Tensor forward_sr(const ParamSet& params, const Tensor& stack);
Tensor forward_sr(const ParamSet& params, const Volume& stack);
/// Each slice is [1,H,W] (or [H,W]). Returns the pre-sigmoid scalar logit.
Tensor forward_discriminator(const ParamSet& params, std::span<const Tensor> slices, Rng& rng, bool training,
                             double dropout_p = 0.5);

}  // namespace vxgan
