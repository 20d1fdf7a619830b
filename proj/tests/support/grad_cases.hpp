#pragma once

// Small differentiable problems, one per op and per full network, shared by
// the unit tests and the acceptance gradient criterion.

#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "vxgan/losses.hpp"
#include "vxgan/nets.hpp"

namespace vxgan::testing {

struct GradCase {
  ParamSet params;
  std::function<Tensor(const ParamSet&)> loss;
};

struct GradCaseFactory {
  std::string name;
  std::function<GradCase(std::uint64_t seed)> make;
};

// Contracts a tensor to a scalar with fixed random weights so every output
// element carries a distinct gradient.
inline std::function<Tensor(const ParamSet&)> contract(Rng& rng, std::function<Tensor(const ParamSet&)> f,
                                                       const ParamSet& probe) {
  const Tensor out = f(probe.detached());
  const Tensor w = random_tensor(rng, out.shape());
  return [f, w](const ParamSet& p) { return sum(mul(f(p), w)); };
}

inline GradCase unary_case(std::uint64_t seed, Shape in, std::function<Tensor(const Tensor&)> op) {
  Rng rng(seed);
  GradCase c;
  c.params.add("x", random_tensor(rng, in, true));
  auto f = [op](const ParamSet& p) { return op(p.at("x")); };
  c.loss = contract(rng, f, c.params);
  return c;
}

inline GradCase binary_case(std::uint64_t seed, Shape a, Shape b,
                            std::function<Tensor(const Tensor&, const Tensor&)> op) {
  Rng rng(seed);
  GradCase c;
  c.params.add("a", random_tensor(rng, a, true));
  c.params.add("b", random_tensor(rng, b, true));
  auto f = [op](const ParamSet& p) { return op(p.at("a"), p.at("b")); };
  c.loss = contract(rng, f, c.params);
  return c;
}

inline GradCase conv_case(std::uint64_t seed, bool three_d, bool same) {
  Rng rng(seed);
  const Index ci = uniform(rng, 1, 3), co = uniform(rng, 1, 3);
  const Index kh = same ? 3 : uniform(rng, 1, 3), kw = same ? 3 : uniform(rng, 1, 3);
  GradCase c;
  if (three_d) {
    const Index kd = uniform(rng, 1, 2);
    c.params.add("x", random_tensor(rng, {ci, kd + uniform(rng, 0, 2), kh + uniform(rng, 0, 3), kw + uniform(rng, 0, 3)}, true));
    c.params.add("k", random_tensor(rng, {co, ci, kd, kh, kw}, true));
  } else {
    c.params.add("x", random_tensor(rng, {ci, kh + uniform(rng, 0, 3), kw + uniform(rng, 0, 3)}, true));
    c.params.add("k", random_tensor(rng, {co, ci, kh, kw}, true));
  }
  c.params.add("b", random_tensor(rng, {co}, true));
  const Padding pad = same ? Padding::Same : Padding::Valid;
  auto f = [three_d, pad](const ParamSet& p) {
    return three_d ? conv3d(p.at("x"), p.at("k"), p.at("b"), pad) : conv2d_valid(p.at("x"), p.at("k"), p.at("b"));
  };
  c.loss = contract(rng, f, c.params);
  return c;
}

inline GradCase transposed_case(std::uint64_t seed, bool same) {
  Rng rng(seed);
  const Index ci = uniform(rng, 1, 3), co = uniform(rng, 1, 3);
  const std::array<Index, 3> stride{uniform(rng, 1, 2), same ? 1 : uniform(rng, 1, 2), same ? 1 : uniform(rng, 1, 2)};
  const Index kd = uniform(rng, 1, 3), kh = same ? 3 : uniform(rng, 1, 3), kw = same ? 3 : uniform(rng, 1, 3);
  GradCase c;
  c.params.add("x", random_tensor(rng, {ci, uniform(rng, 1, 3), uniform(rng, 1, 4), uniform(rng, 1, 4)}, true));
  c.params.add("k", random_tensor(rng, {ci, co, kd, kh, kw}, true));
  const Padding pad = same ? Padding::Same : Padding::Valid;
  auto f = [stride, pad](const ParamSet& p) { return conv3d_transposed(p.at("x"), p.at("k"), stride, pad); };
  c.loss = contract(rng, f, c.params);
  return c;
}

// Full networks at minimal width with every parameter randomized (the
// zero-initialized output layer would otherwise hide all upstream gradients).
inline GradCase network_case(std::uint64_t seed, NetType type) {
  Rng rng(seed);
  const GeneratorOptions g{2};
  Network net;
  std::function<Tensor(const ParamSet&)> f;
  switch (type) {
    case NetType::InterpGen: {
      net = build_interp_generator(seed, g);
      const Tensor x = random_tensor(rng, {2, 24, 23});
      const Image below = Eigen::Map<const Image>(x.value().data(), 24, 23);
      const Image above = Eigen::Map<const Image>(x.value().data() + 24 * 23, 24, 23);
      f = [below, above](const ParamSet& p) { return forward_interp(p, below, above); };
      break;
    }
    case NetType::AlignGen: {
      net = build_align_generator(seed, g);
      const Tensor x = random_tensor(rng, {1, 13, 14, 13});
      f = [x](const ParamSet& p) { return forward_align(p, x); };
      break;
    }
    case NetType::SrGen: {
      net = build_sr_generator(seed, g);
      const Tensor x = random_tensor(rng, {1, 16, 15, 16});
      f = [x](const ParamSet& p) { return forward_sr(p, x); };
      break;
    }
    case NetType::Discriminator: {
      DiscriminatorOptions d;
      d.n_slices = 2;
      d.input = {discriminator_min_input(), discriminator_min_input() + 1};
      d.channels = 2;
      d.hidden = 3;
      net = build_discriminator(seed, d);
      const std::vector<Tensor> s{random_tensor(rng, {1, d.input.h, d.input.w}),
                                  random_tensor(rng, {1, d.input.h, d.input.w})};
      f = [s](const ParamSet& p) {
        Rng unused(0);
        return forward_discriminator(p, s, unused, false);
      };
      break;
    }
  }
  std::normal_distribution<double> normal(0.0, 0.5);
  for (auto& [name, t] : net.params)
    for (Index i = 0; i < t.size(); ++i) t.mutable_value()[i] = normal(rng);
  GradCase c;
  c.params = std::move(net.params);
  c.loss = contract(rng, f, c.params);
  return c;
}

inline std::vector<GradCaseFactory> op_grad_cases() {
  std::vector<GradCaseFactory> cases;
  cases.push_back({"conv2d_valid", [](std::uint64_t s) { return conv_case(s, false, false); }});
  cases.push_back({"conv3d_valid", [](std::uint64_t s) { return conv_case(s, true, false); }});
  cases.push_back({"conv3d_same", [](std::uint64_t s) { return conv_case(s, true, true); }});
  cases.push_back({"conv3d_transposed_valid", [](std::uint64_t s) { return transposed_case(s, false); }});
  cases.push_back({"conv3d_transposed_same", [](std::uint64_t s) { return transposed_case(s, true); }});
  cases.push_back({"maxpool2d", [](std::uint64_t s) {
                     return unary_case(s, {2, 5, 6}, [](const Tensor& x) { return maxpool2d(x); });
                   }});
  cases.push_back({"dense", [](std::uint64_t s) {
                     Rng rng(s);
                     GradCase c;
                     c.params.add("x", random_tensor(rng, {5}, true));
                     c.params.add("w", random_tensor(rng, {3, 5}, true));
                     c.params.add("b", random_tensor(rng, {3}, true));
                     auto f = [](const ParamSet& p) { return dense(p.at("x"), p.at("w"), p.at("b")); };
                     c.loss = contract(rng, f, c.params);
                     return c;
                   }});
  cases.push_back({"relu", [](std::uint64_t s) { return unary_case(s, {4, 5}, [](const Tensor& x) { return relu(x); }); }});
  cases.push_back({"sigmoid", [](std::uint64_t s) {
                     return unary_case(s, {7}, [](const Tensor& x) { return sigmoid(x); });
                   }});
  cases.push_back({"dropout", [](std::uint64_t s) {
                     // Same mask on every evaluation.
                     return unary_case(s, {12}, [s](const Tensor& x) {
                       Rng mask(s);
                       return dropout(x, 0.5, mask, true);
                     });
                   }});
  cases.push_back({"add", [](std::uint64_t s) { return binary_case(s, {2, 3}, {2, 3}, [](auto& a, auto& b) { return add(a, b); }); }});
  cases.push_back({"sub", [](std::uint64_t s) { return binary_case(s, {2, 3}, {2, 3}, [](auto& a, auto& b) { return sub(a, b); }); }});
  cases.push_back({"mul", [](std::uint64_t s) { return binary_case(s, {2, 3}, {2, 3}, [](auto& a, auto& b) { return mul(a, b); }); }});
  cases.push_back({"scale", [](std::uint64_t s) {
                     return unary_case(s, {3, 2}, [](const Tensor& x) { return scale(x, -1.7); });
                   }});
  cases.push_back({"sum", [](std::uint64_t s) { return unary_case(s, {3, 4}, [](const Tensor& x) { return sum(x); }); }});
  cases.push_back({"add_n", [](std::uint64_t s) {
                     return binary_case(s, {4}, {4}, [](auto& a, auto& b) {
                       const std::vector<Tensor> terms{a, b, a};
                       return add_n(terms);
                     });
                   }});
  cases.push_back({"reshape", [](std::uint64_t s) {
                     return unary_case(s, {2, 6}, [](const Tensor& x) { return reshape(x, {3, 4}); });
                   }});
  cases.push_back({"crop", [](std::uint64_t s) {
                     return unary_case(s, {3, 5, 4}, [](const Tensor& x) {
                       const Index start[] = {1, 1, 0}, extent[] = {2, 3, 2};
                       return crop(x, start, extent);
                     });
                   }});
  cases.push_back({"center_crop", [](std::uint64_t s) {
                     return unary_case(s, {1, 7, 6}, [](const Tensor& x) { return center_crop(x, {1, 4, 3}); });
                   }});
  cases.push_back({"concat", [](std::uint64_t s) {
                     return binary_case(s, {2, 2}, {3}, [](auto& a, auto& b) {
                       const std::vector<Tensor> parts{a, b};
                       return concat(parts);
                     });
                   }});
  cases.push_back({"bce_real", [](std::uint64_t s) {
                     return unary_case(s, {1}, [](const Tensor& x) { return bce_loss(scale(x, 3.0), 1); });
                   }});
  cases.push_back({"bce_fake", [](std::uint64_t s) {
                     return unary_case(s, {1}, [](const Tensor& x) { return bce_loss(scale(x, 3.0), 0); });
                   }});
  cases.push_back({"l1_pixel_loss", [](std::uint64_t s) {
                     return binary_case(s, {3, 3}, {3, 3}, [](auto& a, auto& b) { return l1_pixel_loss(a, b); });
                   }});
  cases.push_back({"mse_loss", [](std::uint64_t s) {
                     return binary_case(s, {3, 3}, {3, 3}, [](auto& a, auto& b) { return mse_loss(a, b); });
                   }});
  return cases;
}

inline std::vector<GradCaseFactory> network_grad_cases() {
  return {
      {"interp_generator", [](std::uint64_t s) { return network_case(s, NetType::InterpGen); }},
      {"align_generator", [](std::uint64_t s) { return network_case(s, NetType::AlignGen); }},
      {"sr_generator", [](std::uint64_t s) { return network_case(s, NetType::SrGen); }},
      {"discriminator", [](std::uint64_t s) { return network_case(s, NetType::Discriminator); }},
  };
}

}  // namespace vxgan::testing
