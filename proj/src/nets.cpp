#include "vxgan/nets.hpp"

#include <cmath>
#include <sstream>

namespace vxgan {
namespace {

constexpr int kInterpModulesBeforeFusion = 2;
constexpr int kInterpModulesAfterFusion = 2;
constexpr int kAlignModules = 2;
constexpr int kSrModulesBeforeUpsample = 3;
constexpr int kSrModulesAfterUpsample = 2;
constexpr Index kDiscKernel = 5;
constexpr int kDiscStages = 3;

using Op = LayerSpec::Op;

LayerSpec conv(std::string name, Op op, Index cin, Index cout, std::array<Index, 3> kernel,
               Padding padding = Padding::Valid) {
  LayerSpec l;
  l.name = std::move(name);
  l.op = op;
  l.in_channels = cin;
  l.out_channels = cout;
  l.kernel = kernel;
  l.padding = padding;
  return l;
}

// Two pre-activation convolutions sharing one center-cropped identity skip.
void add_residual_module(LayerPlan& plan, int index, Op op, Index width, std::array<Index, 3> kernel,
                         Padding padding = Padding::Valid) {
  for (int c = 0; c < 2; ++c) {
    LayerSpec l = conv("res" + std::to_string(index) + ".conv" + std::to_string(c), op, width, width, kernel,
                       padding);
    l.pre_relu = true;
    l.residual_module = index;
    plan.layers.push_back(std::move(l));
  }
}

LayerSpec output_layer(Op op, Index width, std::array<Index, 3> kernel, Padding padding = Padding::Valid) {
  LayerSpec l = conv("out", op, width, 1, kernel, padding);
  l.pre_relu = true;
  l.zero_init = true;
  return l;
}

Index fan_in(const LayerSpec& l) {
  const Index taps = l.kernel[0] * l.kernel[1] * l.kernel[2];
  if (l.op == Op::ConvTranspose3d) return l.in_channels * taps / l.stride[0];
  if (l.op == Op::Dense) return l.in_channels;
  return l.in_channels * taps;
}

Network instantiate(LayerPlan plan, std::uint64_t seed) {
  Network net;
  Rng rng(seed);
  for (const auto& l : plan.layers) {
    if (l.name.empty()) continue;
    const Shape ws = l.weight_shape();
    Array w = Array::Zero(shape_size(ws));
    if (!l.zero_init) {
      // The discriminator's logit layer starts small so initial probabilities sit near 0.5.
      const double gain = (l.op == Op::Dense && l.out_channels == 1) ? 0.1 : 2.0;
      std::normal_distribution<double> normal(0.0, std::sqrt(gain / static_cast<double>(fan_in(l))));
      for (Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
    }
    net.params.add(l.name + ".weight", Tensor(ws, std::move(w), true));
    if (l.has_bias) net.params.add(l.name + ".bias", Tensor({l.out_channels}, true));
  }
  net.plan = std::move(plan);
  return net;
}

const Tensor& weight(const ParamSet& p, const std::string& layer) { return p.at(layer + ".weight"); }
const Tensor& bias(const ParamSet& p, const std::string& layer) { return p.at(layer + ".bias"); }

Tensor residual3d(const ParamSet& p, int index, const Tensor& x, Padding padding = Padding::Valid) {
  const std::string name = "res" + std::to_string(index);
  Tensor h = conv3d(relu(x), weight(p, name + ".conv0"), bias(p, name + ".conv0"), padding);
  h = conv3d(relu(h), weight(p, name + ".conv1"), bias(p, name + ".conv1"), padding);
  return h + center_crop(x, h.shape());
}

Tensor residual2d(const ParamSet& p, int index, const Tensor& x) {
  const std::string name = "res" + std::to_string(index);
  Tensor h = conv2d_valid(relu(x), weight(p, name + ".conv0"), bias(p, name + ".conv0"));
  h = conv2d_valid(relu(h), weight(p, name + ".conv1"), bias(p, name + ".conv1"));
  return h + center_crop(x, h.shape());
}

Tensor as_stack(const Volume& v) { return to_tensor(v); }

void require_stack(const Tensor& stack, const char* who) {
  if (stack.rank() != 4 || stack.dim(0) != 1)
    throw ShapeMismatch(std::string(who) + ": stack must be [1,Z,Y,X], got " + shape_string(stack.shape()));
}

}  // namespace

const char* net_type_name(NetType type) {
  switch (type) {
    case NetType::InterpGen: return "interp-generator";
    case NetType::AlignGen: return "align-generator";
    case NetType::SrGen: return "sr-generator";
    case NetType::Discriminator: return "discriminator";
  }
  return "?";
}

Shape LayerSpec::weight_shape() const {
  switch (op) {
    case Op::Conv2d: return {out_channels, in_channels, kernel[1], kernel[2]};
    case Op::Conv3d: return {out_channels, in_channels, kernel[0], kernel[1], kernel[2]};
    case Op::ConvTranspose3d: return {in_channels, out_channels, kernel[0], kernel[1], kernel[2]};
    case Op::Dense: return {out_channels, in_channels};
    case Op::MaxPool2d:
    case Op::Dropout: return {};
  }
  return {};
}

Index LayerSpec::parameter_count() const {
  if (name.empty()) return 0;
  return shape_size(weight_shape()) + (has_bias ? out_channels : 0);
}

Index LayerPlan::parameter_count() const {
  Index n = 0;
  for (const auto& l : layers) n += l.parameter_count();
  return n;
}

Index LayerPlan::count_3x3_convs() const {
  Index n = 0;
  for (const auto& l : layers)
    if ((l.op == Op::Conv2d || l.op == Op::Conv3d || l.op == Op::ConvTranspose3d) && l.kernel[1] == 3 &&
        l.kernel[2] == 3)
      ++n;
  return n;
}

std::string LayerPlan::describe() const {
  static const char* op_names[] = {"conv2d", "conv3d", "convT3d", "maxpool2d", "dropout", "dense"};
  std::ostringstream os;
  os << net_type_name(type) << " (" << parameter_count() << " parameters)\n";
  for (const auto& l : layers) {
    os << "  " << (l.name.empty() ? "-" : l.name) << ": ";
    if (l.pre_relu) os << "relu -> ";
    os << op_names[static_cast<int>(l.op)];
    if (!l.name.empty()) {
      os << ' ' << l.in_channels << "->" << l.out_channels;
      if (l.op != Op::Dense) os << " k" << l.kernel[0] << 'x' << l.kernel[1] << 'x' << l.kernel[2];
      if (l.op == Op::ConvTranspose3d) os << " s" << l.stride[0] << 'x' << l.stride[1] << 'x' << l.stride[2];
      if (l.padding == Padding::Same) os << " same";
    }
    if (l.post_relu) os << " -> relu";
    if (l.residual_module >= 0) os << "  [module " << l.residual_module << ']';
    if (l.zero_init) os << "  (zero init)";
    os << '\n';
  }
  return os.str();
}

Network build_interp_generator(std::uint64_t seed, GeneratorOptions options) {
  const Index w = options.width;
  LayerPlan plan;
  plan.type = NetType::InterpGen;
  plan.layers.push_back(conv("lift", Op::Conv3d, 1, w, {1, 3, 3}));
  int module = 0;
  for (int i = 0; i < kInterpModulesBeforeFusion; ++i) add_residual_module(plan, module++, Op::Conv3d, w, {1, 3, 3});
  LayerSpec fuse = conv("fuse", Op::Conv3d, w, w, {2, 3, 3});
  fuse.pre_relu = true;
  plan.layers.push_back(fuse);
  for (int i = 0; i < kInterpModulesAfterFusion; ++i) add_residual_module(plan, module++, Op::Conv2d, w, {1, 3, 3});
  plan.layers.push_back(output_layer(Op::Conv2d, w, {1, 3, 3}));
  return instantiate(std::move(plan), seed);
}

Network build_align_generator(std::uint64_t seed, GeneratorOptions options) {
  const Index w = options.width;
  LayerPlan plan;
  plan.type = NetType::AlignGen;
  plan.layers.push_back(conv("lift", Op::Conv3d, 1, w, {3, 3, 3}));
  for (int i = 0; i < kAlignModules; ++i) add_residual_module(plan, i, Op::Conv3d, w, {3, 3, 3});
  plan.layers.push_back(output_layer(Op::Conv3d, w, {3, 3, 3}));
  return instantiate(std::move(plan), seed);
}

Network build_sr_generator(std::uint64_t seed, GeneratorOptions options) {
  const Index w = options.width;
  LayerPlan plan;
  plan.type = NetType::SrGen;
  plan.layers.push_back(conv("lift", Op::Conv3d, 1, w, {3, 3, 3}));
  int module = 0;
  for (int i = 0; i < kSrModulesBeforeUpsample; ++i) add_residual_module(plan, module++, Op::Conv3d, w, {3, 3, 3});
  LayerSpec up = conv("upsample", Op::ConvTranspose3d, w, w, {2, 3, 3}, Padding::Same);
  up.stride = {2, 1, 1};
  up.pre_relu = true;
  up.has_bias = false;
  plan.layers.push_back(up);
  for (int i = 0; i < kSrModulesAfterUpsample; ++i)
    add_residual_module(plan, module++, Op::Conv3d, w, {1, 3, 3}, Padding::Same);
  plan.layers.push_back(output_layer(Op::Conv3d, w, {1, 3, 3}, Padding::Same));
  return instantiate(std::move(plan), seed);
}

Network build_discriminator(std::uint64_t seed, DiscriminatorOptions options) {
  if (options.n_slices != 1 && options.n_slices != 2) throw Error("discriminator takes 1 or 2 slices");
  const Index fh = discriminator_tower_extent(options.input.h);
  const Index fw = discriminator_tower_extent(options.input.w);
  if (fh < 1 || fw < 1)
    throw InputTooSmall("discriminator input " + std::to_string(options.input.h) + "x" +
                        std::to_string(options.input.w) + " does not survive three conv-pool stages (minimum " +
                        std::to_string(discriminator_min_input()) + ")");
  const Index c = options.channels;
  LayerPlan plan;
  plan.type = NetType::Discriminator;
  for (int s = 0; s < kDiscStages; ++s) {
    LayerSpec l = conv("tower.conv" + std::to_string(s), Op::Conv2d, s == 0 ? 1 : c, c, {1, kDiscKernel, kDiscKernel});
    l.post_relu = true;
    plan.layers.push_back(l);
    LayerSpec pool;
    pool.op = Op::MaxPool2d;
    pool.kernel = {1, 2, 2};
    pool.stride = {1, 2, 2};
    plan.layers.push_back(pool);
  }
  LayerSpec drop;
  drop.op = Op::Dropout;
  plan.layers.push_back(drop);
  LayerSpec fc0;
  fc0.name = "fc0";
  fc0.op = Op::Dense;
  fc0.in_channels = options.n_slices * c * fh * fw;
  fc0.out_channels = options.hidden;
  fc0.post_relu = true;
  plan.layers.push_back(fc0);
  LayerSpec fc1;
  fc1.name = "fc1";
  fc1.op = Op::Dense;
  fc1.in_channels = options.hidden;
  fc1.out_channels = 1;
  plan.layers.push_back(fc1);
  return instantiate(std::move(plan), seed);
}

PatchSize interp_output_size(PatchSize input) {
  const Index m = 2 * kInterpMargin;
  if (input.h <= m || input.w <= m)
    throw InputTooSmall("interpolation generator needs sections of at least " + std::to_string(m + 1) + "x" +
                        std::to_string(m + 1));
  return {input.h - m, input.w - m};
}

Dims align_output_dims(Dims input) {
  const Index m = 2 * kAlignMargin;
  if (input.z <= m || input.y <= m || input.x <= m)
    throw InputTooSmall("alignment generator needs every extent >= " + std::to_string(m + 1));
  return {input.z - m, input.y - m, input.x - m};
}

Dims sr_output_dims(Dims input) {
  const Index m = 2 * kSrMargin;
  if (input.z <= m || input.y <= m || input.x <= m)
    throw InputTooSmall("super-resolution generator needs every extent >= " + std::to_string(m + 1));
  return {2 * (input.z - m), input.y - m, input.x - m};
}

Index discriminator_tower_extent(Index input) {
  Index s = input;
  for (int stage = 0; stage < kDiscStages; ++stage) {
    s -= kDiscKernel - 1;
    if (s < 2) return 0;
    s /= 2;
  }
  return s;
}

Index discriminator_min_input() {
  Index n = 1;
  while (discriminator_tower_extent(n) < 1) ++n;
  return n;
}

Tensor forward_interp(const ParamSet& p, const Image& below, const Image& above) {
  if (below.rows() != above.rows() || below.cols() != above.cols())
    throw ShapeMismatch("forward_interp: neighbouring sections differ in size");
  interp_output_size({below.rows(), below.cols()});
  const Index h = below.rows(), w = below.cols();
  Array input(2 * h * w);
  input.head(h * w) = Eigen::Map<const Array>(below.data(), h * w);
  input.tail(h * w) = Eigen::Map<const Array>(above.data(), h * w);
  Tensor x({1, 2, h, w}, std::move(input));

  x = conv3d(x, weight(p, "lift"), bias(p, "lift"));
  int module = 0;
  for (int i = 0; i < kInterpModulesBeforeFusion; ++i) x = residual3d(p, module++, x);
  x = conv3d(relu(x), weight(p, "fuse"), bias(p, "fuse"));  // [C,1,h,w]
  x = reshape(x, {x.dim(0), x.dim(2), x.dim(3)});
  for (int i = 0; i < kInterpModulesAfterFusion; ++i) x = residual2d(p, module++, x);
  return conv2d_valid(relu(x), weight(p, "out"), bias(p, "out"));
}

Tensor forward_align(const ParamSet& p, const Tensor& stack) {
  require_stack(stack, "forward_align");
  align_output_dims({stack.dim(1), stack.dim(2), stack.dim(3)});
  Tensor x = conv3d(stack, weight(p, "lift"), bias(p, "lift"));
  for (int i = 0; i < kAlignModules; ++i) x = residual3d(p, i, x);
  return conv3d(relu(x), weight(p, "out"), bias(p, "out"));
}

Tensor forward_align(const ParamSet& p, const Volume& stack) { return forward_align(p, as_stack(stack)); }

Tensor forward_sr(const ParamSet& p, const Tensor& stack) {
  require_stack(stack, "forward_sr");
  sr_output_dims({stack.dim(1), stack.dim(2), stack.dim(3)});
  Tensor x = conv3d(stack, weight(p, "lift"), bias(p, "lift"));
  int module = 0;
  for (int i = 0; i < kSrModulesBeforeUpsample; ++i) x = residual3d(p, module++, x);
  x = conv3d_transposed(relu(x), weight(p, "upsample"), {2, 1, 1}, Padding::Same);
  for (int i = 0; i < kSrModulesAfterUpsample; ++i) x = residual3d(p, module++, x, Padding::Same);
  return conv3d(relu(x), weight(p, "out"), bias(p, "out"), Padding::Same);
}

Tensor forward_sr(const ParamSet& p, const Volume& stack) { return forward_sr(p, as_stack(stack)); }

Tensor forward_discriminator(const ParamSet& p, std::span<const Tensor> slices, Rng& rng, bool training,
                             double dropout_p) {
  if (slices.empty()) throw ShapeMismatch("forward_discriminator: no input slices");
  std::vector<Tensor> towers;
  towers.reserve(slices.size());
  for (const Tensor& s : slices) {
    if (s.shape() != slices[0].shape()) throw ShapeMismatch("forward_discriminator: slices differ in shape");
    Tensor x = s.rank() == 2 ? reshape(s, {1, s.dim(0), s.dim(1)}) : s;
    if (x.rank() != 3 || x.dim(0) != 1)
      throw ShapeMismatch("forward_discriminator: slice must be [H,W] or [1,H,W], got " + shape_string(s.shape()));
    for (int stage = 0; stage < kDiscStages; ++stage) {
      const std::string name = "tower.conv" + std::to_string(stage);
      if (x.dim(1) < kDiscKernel || x.dim(2) < kDiscKernel)
        throw ShapeMismatch("forward_discriminator: slice too small for the conv-pool tower");
      x = relu(conv2d_valid(x, weight(p, name), bias(p, name)));
      if (x.dim(1) < 2 || x.dim(2) < 2)
        throw ShapeMismatch("forward_discriminator: slice too small for the conv-pool tower");
      x = maxpool2d(x);
    }
    towers.push_back(x);
  }
  Tensor features = concat(towers);
  const Tensor& w0 = weight(p, "fc0");
  if (w0.dim(1) != features.size())
    throw ShapeMismatch("forward_discriminator: built for " + std::to_string(w0.dim(1)) + " features, got " +
                        std::to_string(features.size()) + " (wrong slice count or size)");
  features = dropout(features, dropout_p, rng, training);
  Tensor hidden = relu(dense(features, w0, bias(p, "fc0")));
  return dense(hidden, weight(p, "fc1"), bias(p, "fc1"));
}

}  // namespace vxgan
