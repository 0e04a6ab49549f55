// SPDX-License-Identifier: Apache-2.0
#include "kjepa/numerics/optim.hpp"

#include <cmath>

namespace kjepa {

template <typename T>
void adam_step(AdamState<T>& state, ParamSet<T>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor<T>& p = params.tensor(i);
    if (p.requires_grad() && !p.has_grad())
      throw ContractError("adam_step: parameter '" + params.name(i) + "' has no gradient");
  }
  ++state.step;
  const auto& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = params.tensor(i);
    if (!p.requires_grad()) continue;
    auto& [m, v] = state.moments[params.name(i)];
    if (m.size() != p.numel()) {
      if (!m.empty())
        throw ContractError("adam_step: shape of '" + params.name(i) + "' changed");
      m.assign(p.numel(), T{0});
      v.assign(p.numel(), T{0});
    }
    std::span<T> g = p.grad();
    std::span<T> w = p.data();
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double gj = static_cast<double>(g[j]);
      const double mj = c.beta1 * static_cast<double>(m[j]) + (1.0 - c.beta1) * gj;
      const double vj = c.beta2 * static_cast<double>(v[j]) + (1.0 - c.beta2) * gj * gj;
      m[j] = static_cast<T>(mj);
      v[j] = static_cast<T>(vj);
      const double mhat = mj / bc1;
      const double vhat = vj / bc2;
      w[j] = static_cast<T>(static_cast<double>(w[j]) - c.lr * mhat / (std::sqrt(vhat) + c.eps));
    }
    p.zero_grad();
  }
}

template <typename T>
void ema_update(ParamSet<T>& target, const ParamSet<T>& online, double alpha,
                std::string_view prefix) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ContractError("ema_update: alpha must lie in [0, 1]");
  std::size_t matched = 0;
  for (std::size_t i = 0; i < online.size(); ++i)
    if (online.name(i).starts_with(prefix)) ++matched;
  if (matched != target.size())
    throw ContractError("ema_update: target has " + std::to_string(target.size()) +
                        " parameters, online has " + std::to_string(matched));
  for (std::size_t i = 0; i < target.size(); ++i) {
    const std::string& name = target.name(i);
    if (!name.starts_with(prefix) || !online.contains(name))
      throw ContractError("ema_update: online set lacks '" + name + "'");
    const Tensor<T>& src = online.at(name);
    Tensor<T>& dst = target.tensor(i);
    if (src.shape() != dst.shape())
      throw ContractError("ema_update: shape mismatch for '" + name + "'");
    const T a = static_cast<T>(alpha);
    const T b = static_cast<T>(1.0 - alpha);
    for (std::size_t j = 0; j < dst.numel(); ++j) dst[j] = a * dst[j] + b * src[j];
  }
}

template <typename T>
double grad_norm(const ParamSet<T>& params) {
  double s = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (T g : params.tensor(i).grad()) s += static_cast<double>(g) * static_cast<double>(g);
  return std::sqrt(s);
}

template <typename T>
void clip_grad_norm(ParamSet<T>& params, double max_norm) {
  const double n = grad_norm(params);
  if (n <= max_norm || n == 0.0) return;
  const T f = static_cast<T>(max_norm / n);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (T& g : params.tensor(i).grad()) g *= f;
}

template void adam_step(AdamState<float>&, ParamSet<float>&);
template void adam_step(AdamState<double>&, ParamSet<double>&);
template void ema_update(ParamSet<float>&, const ParamSet<float>&, double, std::string_view);
template void ema_update(ParamSet<double>&, const ParamSet<double>&, double, std::string_view);
template double grad_norm(const ParamSet<float>&);
template double grad_norm(const ParamSet<double>&);
template void clip_grad_norm(ParamSet<float>&, double);
template void clip_grad_norm(ParamSet<double>&, double);

}  // namespace kjepa
