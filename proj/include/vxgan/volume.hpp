#pragma once

#include <Eigen/Core>

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "vxgan/ops.hpp"
#include "vxgan/tensor.hpp"

namespace vxgan {

using Image = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Extents in (z, y, x) order.
struct Dims {
  Index z = 0, y = 0, x = 0;
  Index count() const { return z * y * x; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

struct VoxelSize {
  double z = 0.0, y = 0.0, x = 0.0;  // nm
  friend bool operator==(const VoxelSize&, const VoxelSize&) = default;
};

/// 3D scalar grid stored z-major: index = (z*Y + y)*X + x.
class Volume {
 public:
  Volume() = default;
  explicit Volume(Dims dims);
  Volume(Dims dims, Array voxels, std::optional<VoxelSize> voxel_size = std::nullopt);

  const Dims& dims() const { return dims_; }
  const Array& voxels() const { return voxels_; }
  Array& voxels() { return voxels_; }
  const std::optional<VoxelSize>& voxel_size() const { return voxel_size_; }
  void set_voxel_size(std::optional<VoxelSize> vs) { voxel_size_ = vs; }

  Index offset(Index z, Index y, Index x) const { return (z * dims_.y + y) * dims_.x + x; }
  double operator()(Index z, Index y, Index x) const { return voxels_[offset(z, y, x)]; }
  double& operator()(Index z, Index y, Index x) { return voxels_[offset(z, y, x)]; }

  /// Copy of the xy section at depth z.
  Image slice(Index z) const;
  void set_slice(Index z, const Image& img);

 private:
  Dims dims_;
  Array voxels_;
  std::optional<VoxelSize> voxel_size_;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd statistics(const Array& values);

/// (v - mean) / std with population std. Throws DegenerateVolume for constant input.
Volume normalize(const Volume& v);

struct SliceTriple {
  Image below, target, above;
  Index k = 0;
};

struct SlicePair {
  Image below, target;
  Index k = 0;
};

struct PatchSize {
  Index h = 0, w = 0;
};

/// Uniform k in [1, Z-2] and uniform in-plane offset.
SliceTriple sample_triple(const Volume& v, Rng& rng, PatchSize patch);
/// Uniform k in [1, Z-1]; returns sections (k-1, k).
SlicePair sample_pair(const Volume& v, Rng& rng, PatchSize patch);
/// Uniformly placed n*n*n sub-volume.
Volume sample_cube(const Volume& v, Rng& rng, Index n);

enum class ReslicePlane { XZ, YZ };

/// YZ at x=index gives a Z*Y image with [z,y] = v(z,y,index); XZ at y=index gives Z*X.
Image reslice(const Volume& v, ReslicePlane plane, Index index);

/// Symmetric margin removal; when the surplus is odd the extra row/column is
/// dropped from the high-index side. Throws CropTooLarge.
Image center_crop(const Image& img, Index h, Index w);
Volume center_crop(const Volume& v, Dims target);

/// Depth margin (per side) the super-resolution generator removes before upsampling.
inline constexpr Index kSrDepthMargin = 7;

/// (output z, input z) pairs linking even slices of the 2x super-resolution
/// output to the input sections they sit on. Throws VolumeTooSmall for in_z < 15.
std::vector<std::pair<Index, Index>> sr_slice_correspondence(Index in_z);

Tensor to_tensor(const Volume& v);  // [1,Z,Y,X]
Tensor to_tensor(const Image& img);  // [1,H,W]
/// Accepts [Z,Y,X] or [1,Z,Y,X].
Volume to_volume(const Tensor& t);
/// Accepts [H,W] or [1,H,W].
Image to_image(const Tensor& t);

}  // namespace vxgan
