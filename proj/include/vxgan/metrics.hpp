#pragma once

#include <string>
#include <vector>

#include "vxgan/phantom.hpp"
#include "vxgan/tensor.hpp"
#include "vxgan/volume.hpp"

namespace vxgan {

/// Reported in place of +inf when prediction and reference agree exactly.
inline constexpr double kPsnrCap = 999.0;

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  double psnr = 0.0;  // dB, peak = max - min of the reference
  std::vector<double> per_slice_mae;
  Dims region;
};

/// mae/mse are symmetric; psnr takes its peak from `reference`.
MetricsReport compare(const Volume& prediction, const Volume& reference);
MetricsReport compare(const Image& prediction, const Image& reference);
std::string format_report(const MetricsReport& r);

// Inference without graph construction. `tile_z` > 0 splits the output along z
// into chunks of that many slices; results do not depend on the tiling.

/// Interpolates every interior section: output section i predicts input section i+1.
/// Returns (Z-2, Y-22, X-22).
Volume infer_interp(const ParamSet& gen, const Volume& input);
Volume infer_align(const ParamSet& gen, const Volume& input, Index tile_z = 0);
Volume infer_sr(const ParamSet& gen, const Volume& input, Index tile_z = 0);

/// Predicts section k from k-1 and k+1 and compares with `truth` on the crop.
MetricsReport evaluate_interpolation(const ParamSet& gen, const Volume& volume, Index k, const Image& truth);
/// Same, with the volume's own section k as truth.
MetricsReport evaluate_interpolation(const ParamSet& gen, const Volume& volume, Index k);

struct AlignmentEvaluation {
  MetricsReport input_vs_clean;
  MetricsReport output_vs_clean;
};

/// Runs the generator on the normalized degraded volume. Both reports cover the
/// generator's output region.
AlignmentEvaluation evaluate_alignment(const ParamSet& gen, const PhantomTruth& truth, Index tile_z = 0);

}  // namespace vxgan
