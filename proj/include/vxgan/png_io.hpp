#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "vxgan/volume.hpp"

namespace vxgan {

inline constexpr double kPngClamp = 3.0;

struct Gray8 {
  Index height = 0, width = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// Clamps to [-3,3] and maps affinely onto [0,255] (0 -> 128).
std::uint8_t quantize_gray(double v);
Gray8 quantize(const Image& img);

void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const Gray8& img);
/// 8-bit grayscale only; other formats throw FormatError.
Gray8 read_png(const std::filesystem::path& path);

}  // namespace vxgan
