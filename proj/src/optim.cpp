#include "vxgan/optim.hpp"

#include <cmath>

namespace vxgan {
namespace {

void require_grads(const ParamSet& params) {
  for (const auto& [name, t] : params)
    if (!t.has_grad()) throw MissingGradient("parameter '" + name + "' has no gradient");
}

}  // namespace

void Adam::step(ParamSet& params) {
  require_grads(params);
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (auto& [name, tensor] : params) {
    const Array& g = tensor.grad();
    auto [mit, m_new] = m_.try_emplace(name);
    auto [vit, v_new] = v_.try_emplace(name);
    if (m_new || mit->second.size() != g.size()) mit->second = Array::Zero(g.size());
    if (v_new || vit->second.size() != g.size()) vit->second = Array::Zero(g.size());
    Array& m = mit->second;
    Array& v = vit->second;
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.square();
    tensor.mutable_value() -=
        config_.learning_rate * (m / correction1) / ((v / correction2).sqrt() + config_.epsilon);
  }
}

void Adam::restore(std::map<std::string, Array> m, std::map<std::string, Array> v, std::uint64_t t) {
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

void sgd_step(ParamSet& params, double learning_rate) {
  require_grads(params);
  for (auto& [name, tensor] : params) tensor.mutable_value() -= learning_rate * tensor.grad();
}

}  // namespace vxgan
