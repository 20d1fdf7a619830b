#include "vxgan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace vxgan {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMat, Eigen::Unaligned, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, Eigen::Unaligned, Eigen::OuterStride<>>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeMismatch(msg);
}

struct ConvGeometry {
  Index in_ch, depth, height, width;
  Index out_ch, kd, kh, kw;
  Index pad_h, pad_w;
  Index out_d, out_h, out_w;

  Index patch_rows() const { return in_ch * kd * kh * kw; }
  Index plane() const { return out_h * out_w; }
};

// Valid output range [lo, hi) of o such that 0 <= o + offset < extent.
std::pair<Index, Index> valid_range(Index offset, Index extent, Index out_extent) {
  const Index lo = std::clamp<Index>(-offset, 0, out_extent);
  const Index hi = std::clamp<Index>(extent - offset, lo, out_extent);
  return {lo, hi};
}

// Gathers the receptive fields of output depth `oz` into a [patch_rows, plane] matrix.
void im2col(const ConvGeometry& g, const double* in, Index oz, double* cols) {
  const Index plane = g.plane();
  Index row = 0;
  for (Index ci = 0; ci < g.in_ch; ++ci) {
    for (Index a = 0; a < g.kd; ++a) {
      const double* src_plane = in + (ci * g.depth + oz + a) * g.height * g.width;
      for (Index b = 0; b < g.kh; ++b) {
        const auto [y_lo, y_hi] = valid_range(b - g.pad_h, g.height, g.out_h);
        for (Index c = 0; c < g.kw; ++c, ++row) {
          double* dst = cols + row * plane;
          const auto [x_lo, x_hi] = valid_range(c - g.pad_w, g.width, g.out_w);
          std::fill(dst, dst + y_lo * g.out_w, 0.0);
          for (Index y = y_lo; y < y_hi; ++y) {
            double* d = dst + y * g.out_w;
            const double* s = src_plane + (y + b - g.pad_h) * g.width + (c - g.pad_w);
            std::fill(d, d + x_lo, 0.0);
            std::copy(s + x_lo, s + x_hi, d + x_lo);
            std::fill(d + x_hi, d + g.out_w, 0.0);
          }
          std::fill(dst + y_hi * g.out_w, dst + plane, 0.0);
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds a [patch_rows, plane] matrix back into the input.
void col2im(const ConvGeometry& g, const double* cols, Index oz, double* in) {
  const Index plane = g.plane();
  Index row = 0;
  for (Index ci = 0; ci < g.in_ch; ++ci) {
    for (Index a = 0; a < g.kd; ++a) {
      double* dst_plane = in + (ci * g.depth + oz + a) * g.height * g.width;
      for (Index b = 0; b < g.kh; ++b) {
        const auto [y_lo, y_hi] = valid_range(b - g.pad_h, g.height, g.out_h);
        for (Index c = 0; c < g.kw; ++c, ++row) {
          const double* src = cols + row * plane;
          const auto [x_lo, x_hi] = valid_range(c - g.pad_w, g.width, g.out_w);
          for (Index y = y_lo; y < y_hi; ++y) {
            const double* s = src + y * g.out_w;
            double* d = dst_plane + (y + b - g.pad_h) * g.width + (c - g.pad_w);
            for (Index x = x_lo; x < x_hi; ++x) d[x] += s[x];
          }
        }
      }
    }
  }
}

ConvGeometry conv_geometry(const Shape& in, const Shape& k, Padding padding) {
  ConvGeometry g{};
  g.in_ch = in[0];
  g.depth = in[1];
  g.height = in[2];
  g.width = in[3];
  g.out_ch = k[0];
  require(k[1] == g.in_ch, "conv: kernel expects " + std::to_string(k[1]) + " input channels, got " +
                               std::to_string(g.in_ch));
  g.kd = k[2];
  g.kh = k[3];
  g.kw = k[4];
  if (padding == Padding::Same) {
    require(g.kh % 2 == 1 && g.kw % 2 == 1, "conv: 'same' padding needs odd in-plane kernel");
    g.pad_h = g.kh / 2;
    g.pad_w = g.kw / 2;
  }
  require(g.depth >= g.kd, "conv: input depth " + std::to_string(g.depth) + " < kernel depth");
  g.out_d = g.depth - g.kd + 1;
  g.out_h = g.height + 2 * g.pad_h - g.kh + 1;
  g.out_w = g.width + 2 * g.pad_w - g.kw + 1;
  require(g.out_h >= 1 && g.out_w >= 1,
          "conv: input " + shape_string(in) + " too small for kernel " + shape_string(k));
  return g;
}

Tensor conv_impl(const Tensor& input, const Tensor& kernel, const Tensor& bias, Shape in_shape,
                 Shape k_shape, Padding padding, Shape out_shape_override) {
  require(bias.rank() == 1 && bias.dim(0) == k_shape[0], "conv: bias must have C_out entries");
  const ConvGeometry g = conv_geometry(in_shape, k_shape, padding);
  const Index rows = g.patch_rows();
  const Index plane = g.plane();
  const Index out_stride = g.out_d * plane;

  Array out(g.out_ch * out_stride);
  {
    RowMat cols(rows, plane);
    Eigen::Map<const RowMat> kmat(kernel.value().data(), g.out_ch, rows);
    for (Index oz = 0; oz < g.out_d; ++oz) {
      im2col(g, input.value().data(), oz, cols.data());
      StridedMap dst(out.data() + oz * plane, g.out_ch, plane, Eigen::OuterStride<>(out_stride));
      dst.noalias() = kmat * cols;
      dst.colwise() += bias.value().matrix();
    }
  }

  Shape out_shape = out_shape_override.empty() ? Shape{g.out_ch, g.out_d, g.out_h, g.out_w}
                                               : std::move(out_shape_override);
  return Tensor::make_result(
      std::move(out_shape), std::move(out), {input, kernel, bias},
      [g, input, kernel](const Array& grad_out, std::span<Array* const> sinks) {
        const Index rows = g.patch_rows();
        const Index plane = g.plane();
        const Index out_stride = g.out_d * plane;
        Array* d_in = sinks[0];
        Array* d_kernel = sinks[1];
        Array* d_bias = sinks[2];
        Eigen::Map<const RowMat> kmat(kernel.value().data(), g.out_ch, rows);
        RowMat cols(rows, plane);
        RowMat dcols;
        if (d_in) dcols.resize(rows, plane);
        for (Index oz = 0; oz < g.out_d; ++oz) {
          ConstStridedMap gout(grad_out.data() + oz * plane, g.out_ch, plane,
                               Eigen::OuterStride<>(out_stride));
          if (d_kernel) {
            im2col(g, input.value().data(), oz, cols.data());
            Eigen::Map<RowMat> dk(d_kernel->data(), g.out_ch, rows);
            dk.noalias() += gout * cols.transpose();
          }
          if (d_in) {
            dcols.noalias() = kmat.transpose() * gout;
            col2im(g, dcols.data(), oz, d_in->data());
          }
          if (d_bias) d_bias->matrix() += gout.rowwise().sum();
        }
      });
}

}  // namespace

Tensor conv2d_valid(const Tensor& input, const Tensor& kernel, const Tensor& bias) {
  require(input.rank() == 3, "conv2d: input must be [C,H,W], got " + shape_string(input.shape()));
  require(kernel.rank() == 4, "conv2d: kernel must be [C_out,C_in,kh,kw]");
  const Shape& in = input.shape();
  const Shape& k = kernel.shape();
  require(in[1] >= k[2] && in[2] >= k[3],
          "conv2d: input " + shape_string(in) + " smaller than kernel " + shape_string(k));
  Shape out_shape{k[0], in[1] - k[2] + 1, in[2] - k[3] + 1};
  return conv_impl(input, kernel, bias, {in[0], 1, in[1], in[2]}, {k[0], k[1], 1, k[2], k[3]},
                   Padding::Valid, std::move(out_shape));
}

Tensor conv3d(const Tensor& input, const Tensor& kernel, const Tensor& bias, Padding padding_hw) {
  require(input.rank() == 4, "conv3d: input must be [C,D,H,W], got " + shape_string(input.shape()));
  require(kernel.rank() == 5, "conv3d: kernel must be [C_out,C_in,kd,kh,kw]");
  const Shape& in = input.shape();
  const Shape& k = kernel.shape();
  if (padding_hw == Padding::Valid)
    require(in[1] >= k[2] && in[2] >= k[3] && in[3] >= k[4],
            "conv3d: input " + shape_string(in) + " smaller than kernel " + shape_string(k));
  return conv_impl(input, kernel, bias, in, k, padding_hw, {});
}

Tensor conv3d_transposed(const Tensor& input, const Tensor& kernel, std::array<Index, 3> stride,
                         Padding padding_hw) {
  require(input.rank() == 4, "conv3d_transposed: input must be [C,D,H,W]");
  require(kernel.rank() == 5, "conv3d_transposed: kernel must be [C_in,C_out,kd,kh,kw]");
  require(stride[0] >= 1 && stride[1] >= 1 && stride[2] >= 1, "conv3d_transposed: stride must be >= 1");
  const Shape& in = input.shape();
  const Shape& k = kernel.shape();
  require(k[0] == in[0], "conv3d_transposed: kernel expects " + std::to_string(k[0]) +
                             " input channels, got " + std::to_string(in[0]));

  struct Geometry {
    Index ci, d, h, w, co, kd, kh, kw, sd, sh, sw, pad_h, pad_w, od, oh, ow;
  } g{in[0], in[1], in[2], in[3], k[1], k[2], k[3], k[4], stride[0], stride[1], stride[2], 0, 0, 0, 0, 0};
  g.od = (g.d - 1) * g.sd + g.kd;
  if (padding_hw == Padding::Same) {
    require(g.kh >= g.sh && g.kw >= g.sw, "conv3d_transposed: 'same' needs kernel >= stride in-plane");
    g.pad_h = (g.kh - g.sh) / 2;
    g.pad_w = (g.kw - g.sw) / 2;
    g.oh = g.h * g.sh;
    g.ow = g.w * g.sw;
  } else {
    g.oh = (g.h - 1) * g.sh + g.kh;
    g.ow = (g.w - 1) * g.sw + g.kw;
  }
  const Index kcols = g.co * g.kd * g.kh * g.kw;
  const Index in_plane = g.h * g.w;

  // Visits every (kernel row, input pixel) -> output index pair that lands in range.
  auto for_each_tap = [](const Geometry& g, Index z, auto&& fn) {
    Index row = 0;
    for (Index co = 0; co < g.co; ++co)
      for (Index a = 0; a < g.kd; ++a) {
        const Index oz = z * g.sd + a;
        for (Index b = 0; b < g.kh; ++b)
          for (Index c = 0; c < g.kw; ++c, ++row)
            for (Index y = 0; y < g.h; ++y) {
              const Index oy = y * g.sh + b - g.pad_h;
              if (oy < 0 || oy >= g.oh) continue;
              const Index base = ((co * g.od + oz) * g.oh + oy) * g.ow;
              for (Index x = 0; x < g.w; ++x) {
                const Index ox = x * g.sw + c - g.pad_w;
                if (ox < 0 || ox >= g.ow) continue;
                fn(row, y * g.w + x, base + ox);
              }
            }
      }
  };

  Array out = Array::Zero(g.co * g.od * g.oh * g.ow);
  {
    Eigen::Map<const RowMat> kmat(kernel.value().data(), g.ci, kcols);
    RowMat cols(kcols, in_plane);
    for (Index z = 0; z < g.d; ++z) {
      ConstStridedMap in_z(input.value().data() + z * in_plane, g.ci, in_plane,
                           Eigen::OuterStride<>(g.d * in_plane));
      cols.noalias() = kmat.transpose() * in_z;
      for_each_tap(g, z, [&](Index row, Index col, Index o) { out[o] += cols(row, col); });
    }
  }

  return Tensor::make_result(
      {g.co, g.od, g.oh, g.ow}, std::move(out), {input, kernel},
      [g, kcols, in_plane, input, kernel, for_each_tap](const Array& grad_out,
                                                        std::span<Array* const> sinks) {
        Array* d_in = sinks[0];
        Array* d_kernel = sinks[1];
        Eigen::Map<const RowMat> kmat(kernel.value().data(), g.ci, kcols);
        RowMat dcols(kcols, in_plane);
        for (Index z = 0; z < g.d; ++z) {
          dcols.setZero();
          for_each_tap(g, z, [&](Index row, Index col, Index o) { dcols(row, col) = grad_out[o]; });
          if (d_in) {
            StridedMap din_z(d_in->data() + z * in_plane, g.ci, in_plane,
                             Eigen::OuterStride<>(g.d * in_plane));
            din_z.noalias() += kmat * dcols;
          }
          if (d_kernel) {
            ConstStridedMap in_z(input.value().data() + z * in_plane, g.ci, in_plane,
                                 Eigen::OuterStride<>(g.d * in_plane));
            Eigen::Map<RowMat> dk(d_kernel->data(), g.ci, kcols);
            dk.noalias() += in_z * dcols.transpose();
          }
        }
      });
}

Tensor maxpool2d(const Tensor& input) {
  require(input.rank() == 3, "maxpool2d: input must be [C,H,W]");
  const Index c = input.dim(0), h = input.dim(1), w = input.dim(2);
  require(h >= 2 && w >= 2, "maxpool2d: spatial extents must be >= 2, got " + shape_string(input.shape()));
  const Index oh = h / 2, ow = w / 2;
  Array out(c * oh * ow);
  std::vector<Index> argmax(static_cast<std::size_t>(out.size()));
  const Array& x = input.value();
  for (Index ch = 0; ch < c; ++ch)
    for (Index y = 0; y < oh; ++y)
      for (Index xo = 0; xo < ow; ++xo) {
        const Index base = (ch * h + 2 * y) * w + 2 * xo;
        const Index cand[4] = {base, base + 1, base + w, base + w + 1};
        Index best = cand[0];
        for (int i = 1; i < 4; ++i)
          if (x[cand[i]] > x[best]) best = cand[i];
        const Index o = (ch * oh + y) * ow + xo;
        out[o] = x[best];
        argmax[static_cast<std::size_t>(o)] = best;
      }
  return Tensor::make_result({c, oh, ow}, std::move(out), {input},
                             [argmax = std::move(argmax)](const Array& g, std::span<Array* const> sinks) {
                               Array& dx = *sinks[0];
                               for (std::size_t o = 0; o < argmax.size(); ++o)
                                 dx[argmax[o]] += g[static_cast<Index>(o)];
                             });
}

Tensor dense(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  require(input.rank() == 1, "dense: input must be rank 1");
  require(weight.rank() == 2 && weight.dim(1) == input.dim(0),
          "dense: weight " + shape_string(weight.shape()) + " incompatible with input " +
              shape_string(input.shape()));
  require(bias.rank() == 1 && bias.dim(0) == weight.dim(0), "dense: bias must have M entries");
  const Index m = weight.dim(0), n = weight.dim(1);
  Eigen::Map<const RowMat> wmat(weight.value().data(), m, n);
  Array out = (wmat * input.value().matrix()).array() + bias.value();
  return Tensor::make_result({m}, std::move(out), {input, weight, bias},
                             [m, n, input, weight](const Array& g, std::span<Array* const> sinks) {
                               Eigen::Map<const RowMat> wmat(weight.value().data(), m, n);
                               if (sinks[0]) sinks[0]->matrix().noalias() += wmat.transpose() * g.matrix();
                               if (sinks[1]) {
                                 Eigen::Map<RowMat> dw(sinks[1]->data(), m, n);
                                 dw.noalias() += g.matrix() * input.value().matrix().transpose();
                               }
                               if (sinks[2]) *sinks[2] += g;
                             });
}

Tensor relu(const Tensor& t) {
  Array out = t.value().max(0.0);
  return Tensor::make_result(t.shape(), std::move(out), {t}, [t](const Array& g, std::span<Array* const> s) {
    *s[0] += (t.value() > 0.0).select(g, 0.0);
  });
}

Tensor sigmoid(const Tensor& t) {
  Array out = 1.0 / (1.0 + (-t.value()).exp());
  Array y = out;
  return Tensor::make_result(t.shape(), std::move(out), {t},
                             [y = std::move(y)](const Array& g, std::span<Array* const> s) {
                               *s[0] += g * y * (1.0 - y);
                             });
}

Tensor dropout(const Tensor& t, double p, Rng& rng, bool training) {
  if (p < 0.0 || p >= 1.0) throw Error("dropout: p must lie in [0,1)");
  if (!training || p == 0.0) return t;
  std::bernoulli_distribution keep(1.0 - p);
  Array mask(t.size());
  const double kept = 1.0 / (1.0 - p);
  for (Index i = 0; i < mask.size(); ++i) mask[i] = keep(rng) ? kept : 0.0;
  Array out = t.value() * mask;
  return Tensor::make_result(t.shape(), std::move(out), {t},
                             [mask = std::move(mask)](const Array& g, std::span<Array* const> s) {
                               *s[0] += g * mask;
                             });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  return Tensor::make_result(a.shape(), a.value() + b.value(), {a, b},
                             [](const Array& g, std::span<Array* const> s) {
                               if (s[0]) *s[0] += g;
                               if (s[1]) *s[1] += g;
                             });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "sub: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  return Tensor::make_result(a.shape(), a.value() - b.value(), {a, b},
                             [](const Array& g, std::span<Array* const> s) {
                               if (s[0]) *s[0] += g;
                               if (s[1]) *s[1] -= g;
                             });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul: shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  return Tensor::make_result(a.shape(), a.value() * b.value(), {a, b},
                             [a, b](const Array& g, std::span<Array* const> s) {
                               if (s[0]) *s[0] += g * b.value();
                               if (s[1]) *s[1] += g * a.value();
                             });
}

Tensor scale(const Tensor& t, double factor) {
  return Tensor::make_result(t.shape(), t.value() * factor, {t},
                             [factor](const Array& g, std::span<Array* const> s) { *s[0] += g * factor; });
}

Tensor sum(const Tensor& t) {
  return Tensor::make_result({1}, Array::Constant(1, t.value().sum()), {t},
                             [](const Array& g, std::span<Array* const> s) { *s[0] += g[0]; });
}

Tensor add_n(std::span<const Tensor> terms) {
  require(!terms.empty(), "add_n: empty term list");
  Array out = terms[0].value();
  for (std::size_t i = 1; i < terms.size(); ++i) {
    require(terms[i].shape() == terms[0].shape(), "add_n: shape mismatch");
    out += terms[i].value();
  }
  return Tensor::make_result(terms[0].shape(), std::move(out), {terms.begin(), terms.end()},
                             [](const Array& g, std::span<Array* const> s) {
                               for (Array* sink : s)
                                 if (sink) *sink += g;
                             });
}

Tensor reshape(const Tensor& t, Shape shape) {
  require(shape_size(shape) == t.size(),
          "reshape: cannot view " + shape_string(t.shape()) + " as " + shape_string(shape));
  return Tensor::make_result(std::move(shape), t.value(), {t},
                             [](const Array& g, std::span<Array* const> s) { *s[0] += g; });
}

namespace {

// Calls fn(src_offset, dst_offset, run_length) for each contiguous innermost run of a block.
template <typename Fn>
void for_each_block_run(const Shape& src, std::span<const Index> start, std::span<const Index> extent,
                        Fn&& fn) {
  const std::size_t rank = src.size();
  std::vector<Index> strides(rank, 1);
  for (std::size_t i = rank - 1; i > 0; --i) strides[i - 1] = strides[i] * src[i];
  std::vector<Index> idx(rank, 0);
  const Index run = extent[rank - 1];
  Index dst = 0;
  while (true) {
    Index off = 0;
    for (std::size_t i = 0; i < rank; ++i) off += (start[i] + idx[i]) * strides[i];
    fn(off, dst, run);
    dst += run;
    auto axis = static_cast<std::ptrdiff_t>(rank) - 2;
    for (; axis >= 0; --axis) {
      const auto a = static_cast<std::size_t>(axis);
      if (++idx[a] < extent[a]) break;
      idx[a] = 0;
    }
    if (axis < 0) return;
  }
}

}  // namespace

Tensor crop(const Tensor& t, std::span<const Index> start, std::span<const Index> extent) {
  const Shape& src = t.shape();
  require(start.size() == src.size() && extent.size() == src.size(), "crop: rank mismatch");
  for (std::size_t i = 0; i < src.size(); ++i)
    require(start[i] >= 0 && extent[i] >= 1 && start[i] + extent[i] <= src[i],
            "crop: block out of bounds for shape " + shape_string(src));
  Shape out_shape(extent.begin(), extent.end());
  Array out(shape_size(out_shape));
  for_each_block_run(src, start, extent, [&](Index s, Index d, Index n) {
    std::copy(t.value().data() + s, t.value().data() + s + n, out.data() + d);
  });
  std::vector<Index> st(start.begin(), start.end()), ex(extent.begin(), extent.end());
  return Tensor::make_result(std::move(out_shape), std::move(out), {t},
                             [src, st, ex](const Array& g, std::span<Array* const> s) {
                               Array& dx = *s[0];
                               for_each_block_run(src, st, ex, [&](Index so, Index d, Index n) {
                                 dx.segment(so, n) += g.segment(d, n);
                               });
                             });
}

Tensor center_crop(const Tensor& t, const Shape& target) {
  require(target.size() == t.shape().size(), "center_crop: rank mismatch");
  std::vector<Index> start(target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] > t.shape()[i] || target[i] < 1)
      throw CropTooLarge("center_crop: cannot crop " + shape_string(t.shape()) + " to " + shape_string(target));
    start[i] = (t.shape()[i] - target[i]) / 2;
  }
  if (target == t.shape()) return t;
  return crop(t, start, target);
}

Tensor concat(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat: no inputs");
  Index total = 0;
  for (const auto& p : parts) total += p.size();
  Array out(total);
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    out.segment(off, p.size()) = p.value();
    off += p.size();
  }
  std::vector<Index> sizes;
  for (const auto& p : parts) sizes.push_back(p.size());
  return Tensor::make_result({total}, std::move(out), {parts.begin(), parts.end()},
                             [offsets, sizes](const Array& g, std::span<Array* const> s) {
                               for (std::size_t i = 0; i < s.size(); ++i)
                                 if (s[i]) *s[i] += g.segment(offsets[i], sizes[i]);
                             });
}

}  // namespace vxgan
