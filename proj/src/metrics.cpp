#include "vxgan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vxgan/nets.hpp"

namespace vxgan {
namespace {

double psnr_db(double mse, double peak) {
  if (mse == 0.0) return kPsnrCap;
  peak = std::max(peak, 1e-12);
  return std::min(10.0 * std::log10(peak * peak / mse), kPsnrCap);
}

// Stacks output chunks along z.
Volume tiled(const Volume& input, Index margin_z, Index out_per_in, Index tile_z,
             Tensor (*forward)(const ParamSet&, const Tensor&), const ParamSet& gen) {
  const Index in_z = input.dims().z;
  const Index out_z = in_z - 2 * margin_z;
  if (out_z < 1) throw InputTooSmall("volume too thin for the generator");
  if (tile_z <= 0 || tile_z >= out_z) return to_volume(forward(gen, to_tensor(input)));

  std::vector<Volume> parts;
  for (Index z0 = 0; z0 < out_z; z0 += tile_z) {
    const Index n = std::min(tile_z, out_z - z0);
    const Dims d = input.dims();
    Volume chunk(Dims{n + 2 * margin_z, d.y, d.x});
    const Index plane = d.y * d.x;
    chunk.voxels() = input.voxels().segment(z0 * plane, chunk.dims().count());
    parts.push_back(to_volume(forward(gen, to_tensor(chunk))));
  }
  const Dims pd = parts.front().dims();
  Volume out(Dims{out_z * out_per_in, pd.y, pd.x});
  Index offset = 0;
  for (const Volume& p : parts) {
    out.voxels().segment(offset, p.voxels().size()) = p.voxels();
    offset += p.voxels().size();
  }
  return out;
}

Tensor align_fn(const ParamSet& p, const Tensor& t) { return forward_align(p, t); }
Tensor sr_fn(const ParamSet& p, const Tensor& t) { return forward_sr(p, t); }

}  // namespace

MetricsReport compare(const Volume& prediction, const Volume& reference) {
  if (!(prediction.dims() == reference.dims()))
    throw ShapeMismatch("compare: prediction and reference extents differ");
  const Array diff = prediction.voxels() - reference.voxels();
  MetricsReport r;
  r.region = reference.dims();
  r.mae = diff.abs().mean();
  r.mse = diff.square().mean();
  r.psnr = psnr_db(r.mse, reference.voxels().maxCoeff() - reference.voxels().minCoeff());
  const Index plane = r.region.y * r.region.x;
  for (Index z = 0; z < r.region.z; ++z) r.per_slice_mae.push_back(diff.segment(z * plane, plane).abs().mean());
  return r;
}

MetricsReport compare(const Image& prediction, const Image& reference) {
  const Dims d{1, reference.rows(), reference.cols()};
  if (prediction.rows() != d.y || prediction.cols() != d.x)
    throw ShapeMismatch("compare: prediction and reference extents differ");
  return compare(Volume(d, Eigen::Map<const Array>(prediction.data(), prediction.size())),
                 Volume(d, Eigen::Map<const Array>(reference.data(), reference.size())));
}

std::string format_report(const MetricsReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "region\t%lldx%lldx%lld\nmae\t%.9g\nmse\t%.9g\npsnr_db\t%.6g\n",
                static_cast<long long>(r.region.z), static_cast<long long>(r.region.y),
                static_cast<long long>(r.region.x), r.mae, r.mse, r.psnr);
  std::string out = buf;
  out += "per_slice_mae";
  for (double v : r.per_slice_mae) {
    std::snprintf(buf, sizeof buf, "\t%.6g", v);
    out += buf;
  }
  return out + '\n';
}

Volume infer_interp(const ParamSet& gen, const Volume& input) {
  const Dims d = input.dims();
  if (d.z < 3) throw VolumeTooSmall("interpolation needs at least 3 sections");
  const ParamSet frozen = gen.detached();
  const PatchSize out = interp_output_size({d.y, d.x});
  Volume result(Dims{d.z - 2, out.h, out.w});
  for (Index k = 1; k + 1 < d.z; ++k)
    result.set_slice(k - 1, to_image(forward_interp(frozen, input.slice(k - 1), input.slice(k + 1))));
  return result;
}

Volume infer_align(const ParamSet& gen, const Volume& input, Index tile_z) {
  align_output_dims(input.dims());
  return tiled(input, kAlignMargin, 1, tile_z, align_fn, gen.detached());
}

Volume infer_sr(const ParamSet& gen, const Volume& input, Index tile_z) {
  sr_output_dims(input.dims());
  return tiled(input, kSrMargin, 2, tile_z, sr_fn, gen.detached());
}

MetricsReport evaluate_interpolation(const ParamSet& gen, const Volume& volume, Index k, const Image& truth) {
  if (k < 1 || k + 1 >= volume.dims().z)
    throw IndexOutOfRange("section " + std::to_string(k) + " has no neighbours on both sides");
  const Image pred = to_image(forward_interp(gen.detached(), volume.slice(k - 1), volume.slice(k + 1)));
  return compare(pred, center_crop(truth, pred.rows(), pred.cols()));
}

MetricsReport evaluate_interpolation(const ParamSet& gen, const Volume& volume, Index k) {
  if (k < 0 || k >= volume.dims().z) throw IndexOutOfRange("section " + std::to_string(k) + " outside volume");
  return evaluate_interpolation(gen, volume, k, volume.slice(k));
}

AlignmentEvaluation evaluate_alignment(const ParamSet& gen, const PhantomTruth& truth, Index tile_z) {
  if (!(truth.clean.dims() == truth.degraded.dims()))
    throw ShapeMismatch("evaluate_alignment: clean and degraded extents differ");
  const Volume input = normalize(truth.degraded);
  const Volume output = infer_align(gen, input, tile_z);
  const Volume clean = center_crop(truth.clean, output.dims());
  return {compare(center_crop(input, output.dims()), clean), compare(output, clean)};
}

}  // namespace vxgan
