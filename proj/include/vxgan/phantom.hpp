#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "vxgan/volume.hpp"

namespace vxgan {

struct SliceOffset {
  Index dy = 0, dx = 0;
  friend bool operator==(const SliceOffset&, const SliceOffset&) = default;
};

struct PhantomConfig {
  Dims dims{64, 64, 64};
  double structure_scale = 8.0;  // characteristic feature wavelength in voxels
  Index jitter = 0;              // max |dy|, |dx| per section
  double noise_sigma = 0.0;      // additive Gaussian noise, normalized units
  Index drop_count = 0;          // sections zeroed in the degraded volume
  int harmonics = 24;
  std::uint64_t seed = 0;
};

struct PhantomTruth {
  Volume clean;     // zero mean, unit std
  Volume degraded;  // jittered clean + noise, dropped sections zeroed
  std::vector<SliceOffset> offsets;
  std::vector<Index> dropped_slices;  // sorted
};

/// Membrane-like sheets at the zero level set of a random harmonic sum with no
/// preferred orientation, plus a weak texture term. Deterministic in cfg.seed.
PhantomTruth generate_phantom(const PhantomConfig& cfg);

/// Section z is translated by offsets[z]: out(z,y,x) = v(z, clamp(y-dy), clamp(x-dx)).
Volume apply_jitter(const Volume& v, const std::vector<SliceOffset>& offsets);

/// Zeroes section k (1 <= k <= Z-2) and returns the removed section.
std::pair<Volume, Image> drop_slice(const Volume& v, Index k);

/// Volume linear in z (every interior section is exactly the mean of its
/// neighbours when noise == 0) plus i.i.d. Gaussian noise of std `noise`.
Volume make_averaging_volume(Dims dims, double noise, std::uint64_t seed);

/// Text sidecar: one "z dy dx" line per section, then "dropped: k,...".
void write_phantom_sidecar(const std::filesystem::path& path, const PhantomTruth& truth);
std::pair<std::vector<SliceOffset>, std::vector<Index>> read_phantom_sidecar(const std::filesystem::path& path);

}  // namespace vxgan
