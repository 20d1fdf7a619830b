#include "vxgan/volume.hpp"

#include <cmath>
#include <string>

namespace vxgan {
namespace {

std::string dims_string(const Dims& d) {
  return "(" + std::to_string(d.z) + "," + std::to_string(d.y) + "," + std::to_string(d.x) + ")";
}

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

Image block(const Volume& v, Index z, Index y0, Index x0, PatchSize p) {
  Image img(p.h, p.w);
  for (Index y = 0; y < p.h; ++y)
    for (Index x = 0; x < p.w; ++x) img(y, x) = v(z, y0 + y, x0 + x);
  return img;
}

}  // namespace

Volume::Volume(Dims dims) : Volume(dims, Array::Zero(dims.count())) {}

Volume::Volume(Dims dims, Array voxels, std::optional<VoxelSize> voxel_size)
    : dims_(dims), voxels_(std::move(voxels)), voxel_size_(voxel_size) {
  if (dims.z <= 0 || dims.y <= 0 || dims.x <= 0)
    throw DataError("volume extents must be positive, got " + dims_string(dims));
  if (voxels_.size() != dims.count())
    throw DataError("volume " + dims_string(dims) + " needs " + std::to_string(dims.count()) +
                    " voxels, got " + std::to_string(voxels_.size()));
}

Image Volume::slice(Index z) const {
  if (z < 0 || z >= dims_.z) throw IndexOutOfRange("slice " + std::to_string(z) + " outside volume");
  return Eigen::Map<const Image>(voxels_.data() + z * dims_.y * dims_.x, dims_.y, dims_.x);
}

void Volume::set_slice(Index z, const Image& img) {
  if (z < 0 || z >= dims_.z) throw IndexOutOfRange("slice " + std::to_string(z) + " outside volume");
  if (img.rows() != dims_.y || img.cols() != dims_.x) throw ShapeMismatch("set_slice: image size mismatch");
  Eigen::Map<Image>(voxels_.data() + z * dims_.y * dims_.x, dims_.y, dims_.x) = img;
}

MeanStd statistics(const Array& values) {
  MeanStd s;
  s.mean = values.mean();
  s.std = std::sqrt((values - s.mean).square().mean());
  return s;
}

Volume normalize(const Volume& v) {
  const MeanStd s = statistics(v.voxels());
  if (!(s.std > 0.0)) throw DegenerateVolume("cannot normalize a constant volume");
  return Volume(v.dims(), (v.voxels() - s.mean) / s.std, v.voxel_size());
}

SliceTriple sample_triple(const Volume& v, Rng& rng, PatchSize patch) {
  const Dims& d = v.dims();
  if (d.z < 3 || d.y < patch.h || d.x < patch.w || patch.h < 1 || patch.w < 1)
    throw VolumeTooSmall("sample_triple: volume " + dims_string(d) + " too small for patch");
  const Index k = uniform_index(rng, 1, d.z - 2);
  const Index y0 = uniform_index(rng, 0, d.y - patch.h);
  const Index x0 = uniform_index(rng, 0, d.x - patch.w);
  return {block(v, k - 1, y0, x0, patch), block(v, k, y0, x0, patch), block(v, k + 1, y0, x0, patch), k};
}

SlicePair sample_pair(const Volume& v, Rng& rng, PatchSize patch) {
  const Dims& d = v.dims();
  if (d.z < 2 || d.y < patch.h || d.x < patch.w || patch.h < 1 || patch.w < 1)
    throw VolumeTooSmall("sample_pair: volume " + dims_string(d) + " too small for patch");
  const Index k = uniform_index(rng, 1, d.z - 1);
  const Index y0 = uniform_index(rng, 0, d.y - patch.h);
  const Index x0 = uniform_index(rng, 0, d.x - patch.w);
  return {block(v, k - 1, y0, x0, patch), block(v, k, y0, x0, patch), k};
}

Volume sample_cube(const Volume& v, Rng& rng, Index n) {
  const Dims& d = v.dims();
  if (n < 1 || d.z < n || d.y < n || d.x < n)
    throw VolumeTooSmall("sample_cube: volume " + dims_string(d) + " smaller than cube " + std::to_string(n));
  const Index z0 = uniform_index(rng, 0, d.z - n);
  const Index y0 = uniform_index(rng, 0, d.y - n);
  const Index x0 = uniform_index(rng, 0, d.x - n);
  Volume out(Dims{n, n, n});
  for (Index z = 0; z < n; ++z)
    for (Index y = 0; y < n; ++y)
      for (Index x = 0; x < n; ++x) out(z, y, x) = v(z0 + z, y0 + y, x0 + x);
  return out;
}

Image reslice(const Volume& v, ReslicePlane plane, Index index) {
  const Dims& d = v.dims();
  if (plane == ReslicePlane::YZ) {
    if (index < 0 || index >= d.x) throw IndexOutOfRange("yz reslice index " + std::to_string(index));
    Image img(d.z, d.y);
    for (Index z = 0; z < d.z; ++z)
      for (Index y = 0; y < d.y; ++y) img(z, y) = v(z, y, index);
    return img;
  }
  if (index < 0 || index >= d.y) throw IndexOutOfRange("xz reslice index " + std::to_string(index));
  Image img(d.z, d.x);
  for (Index z = 0; z < d.z; ++z)
    for (Index x = 0; x < d.x; ++x) img(z, x) = v(z, index, x);
  return img;
}

Image center_crop(const Image& img, Index h, Index w) {
  if (h < 1 || w < 1 || h > img.rows() || w > img.cols())
    throw CropTooLarge("cannot crop " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) + " to " +
                       std::to_string(h) + "x" + std::to_string(w));
  return img.block((img.rows() - h) / 2, (img.cols() - w) / 2, h, w);
}

Volume center_crop(const Volume& v, Dims target) {
  const Dims& d = v.dims();
  if (target.z < 1 || target.y < 1 || target.x < 1 || target.z > d.z || target.y > d.y || target.x > d.x)
    throw CropTooLarge("cannot crop " + dims_string(d) + " to " + dims_string(target));
  const Index z0 = (d.z - target.z) / 2, y0 = (d.y - target.y) / 2, x0 = (d.x - target.x) / 2;
  Volume out(target, Array(target.count()), v.voxel_size());
  for (Index z = 0; z < target.z; ++z)
    for (Index y = 0; y < target.y; ++y)
      for (Index x = 0; x < target.x; ++x) out(z, y, x) = v(z0 + z, y0 + y, x0 + x);
  return out;
}

std::vector<std::pair<Index, Index>> sr_slice_correspondence(Index in_z) {
  if (in_z < 2 * kSrDepthMargin + 1)
    throw VolumeTooSmall("super-resolution needs at least " + std::to_string(2 * kSrDepthMargin + 1) +
                         " input sections, got " + std::to_string(in_z));
  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i <= in_z - 2 * kSrDepthMargin - 1; ++i) pairs.emplace_back(2 * i, i + kSrDepthMargin);
  return pairs;
}

Tensor to_tensor(const Volume& v) {
  return Tensor({1, v.dims().z, v.dims().y, v.dims().x}, v.voxels());
}

Tensor to_tensor(const Image& img) {
  Array values = Eigen::Map<const Array>(img.data(), img.size());
  return Tensor({1, img.rows(), img.cols()}, std::move(values));
}

Volume to_volume(const Tensor& t) {
  const Shape& s = t.shape();
  if (s.size() == 3) return Volume(Dims{s[0], s[1], s[2]}, t.value());
  if (s.size() == 4 && s[0] == 1) return Volume(Dims{s[1], s[2], s[3]}, t.value());
  throw ShapeMismatch("to_volume: expected [Z,Y,X] or [1,Z,Y,X], got " + shape_string(s));
}

Image to_image(const Tensor& t) {
  const Shape& s = t.shape();
  Index h = 0, w = 0;
  if (s.size() == 2) {
    h = s[0];
    w = s[1];
  } else if (s.size() == 3 && s[0] == 1) {
    h = s[1];
    w = s[2];
  } else {
    throw ShapeMismatch("to_image: expected [H,W] or [1,H,W], got " + shape_string(s));
  }
  return Eigen::Map<const Image>(t.value().data(), h, w);
}

}  // namespace vxgan
