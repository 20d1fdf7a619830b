#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vxgan/volume.hpp"

namespace vxgan {

// VXV1 layout (little-endian): "VXV1", u32 Z, u32 Y, u32 X, f32 voxel size
// z/y/x in nm (zeros when unknown), then Z*Y*X f32 voxels in z-major order.

void write_vxv(const std::filesystem::path& path, const Volume& v);
Volume read_vxv(const std::filesystem::path& path);

/// Headerless u8 volume in z-major order; byte b maps to b/255.
Volume import_raw_u8(const std::filesystem::path& path, Dims dims,
                     std::optional<VoxelSize> voxel_size = std::nullopt);
/// Inverse of import_raw_u8 for values in [0,1]: round(v*255), clamped.
std::vector<std::uint8_t> export_raw_u8(const Volume& v);

}  // namespace vxgan
