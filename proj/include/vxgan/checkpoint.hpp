#pragma once

#include <filesystem>

#include "vxgan/optim.hpp"
#include "vxgan/tensor.hpp"

namespace vxgan {

// VXCK layout (little-endian): "VXCK", u32 version (1), u32 tensor count, then
// per tensor: u16 name length, UTF-8 name, u8 rank, rank x u32 dims, f64 data.
// Optional trailer: "ADAM", u32 count + first-moment tensors, u32 count +
// second-moment tensors (same framing, named after their parameters), u64 t.

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const Adam* adam = nullptr);

/// Loads parameters (requires_grad set). When `adam` is non-null and the file
/// carries an ADAM trailer, the optimizer state is restored into it.
ParamSet load_checkpoint(const std::filesystem::path& path, Adam* adam = nullptr);

}  // namespace vxgan
