// SPDX-License-Identifier: Apache-2.0
#include "kjepa/numerics/tape.hpp"

#include <cmath>
#include <string>

#include "kjepa/numerics/kernels.hpp"
#include "kjepa/rng.hpp"

namespace kjepa {

namespace kp = kernels::parallel;

template <typename T>
bool Tensor<T>::all_finite() const noexcept {
  for (T v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template class Tensor<float>;
template class Tensor<double>;

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
    throw ContractError("tape: variable does not belong to this tape");
  return nodes_[static_cast<std::size_t>(v.id)];
}

template <typename T>
typename Tape<T>::Node& Tape<T>::node(Var v) {
  return const_cast<Node&>(std::as_const(*this).node(v));
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  const Node& n = node(v);
  return n.external ? *n.external : n.owned;
}

template <typename T>
std::span<const T> Tape<T>::grad(Var v) const {
  return node(v).grad;
}

template <typename T>
bool Tape<T>::requires_grad(Var v) const {
  return node(v).requires_grad;
}

template <typename T>
std::span<T> Tape<T>::grad_buf(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad.assign(val(id).numel(), T{0});
  return n.grad;
}

template <typename T>
typename Tape<T>::Var Tape<T>::push(Tensor<T> value, bool requires_grad, BackwardFn fn) {
  if (backward_done_) throw ContractError("tape: cannot record after backward()");
  Node n;
  n.owned = std::move(value);
  n.requires_grad = requires_grad && mode_ == Mode::record;
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
bool Tape<T>::any_grad(std::initializer_list<Var> vs) const {
  for (Var v : vs)
    if (v.valid() && node(v).requires_grad) return true;
  return false;
}

template <typename T>
typename Tape<T>::Var Tape<T>::constant(Tensor<T> value) {
  return push(std::move(value), false, nullptr);
}

template <typename T>
typename Tape<T>::Var Tape<T>::parameter(Tensor<T>& p) {
  if (backward_done_) throw ContractError("tape: cannot record after backward()");
  Node n;
  n.external = &p;
  n.requires_grad = p.requires_grad() && mode_ == Mode::record;
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
typename Tape<T>::Var Tape<T>::conv1d(Var x, Var w, std::optional<Var> bias, std::size_t stride,
                                      std::size_t padding) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& wv = value(w);
  if (xv.rank() != 3 || wv.rank() != 3)
    throw DimensionError("conv1d: expected input [B, C, L] and weight [O, C, K], got " +
                         shape_str(xv.shape()) + " and " + shape_str(wv.shape()));
  if (xv.dim(1) != wv.dim(1))
    throw DimensionError("conv1d: input has " + std::to_string(xv.dim(1)) +
                         " channels, weight expects " + std::to_string(wv.dim(1)));
  if (stride < 1) throw DimensionError("conv1d: stride must be >= 1");
  if (xv.dim(2) + 2 * padding < wv.dim(2))
    throw DimensionError("conv1d: padded length shorter than kernel");
  const Var bvar = bias.value_or(Var{});
  if (bvar.valid() && (value(bvar).rank() != 1 || value(bvar).dim(0) != wv.dim(0)))
    throw DimensionError("conv1d: bias shape " + shape_str(value(bvar).shape()));

  kernels::Conv1dGeometry g{xv.dim(0), xv.dim(1), wv.dim(0), xv.dim(2), wv.dim(2), stride, padding};
  Tensor<T> y({g.batch, g.out_channels, g.out_length()});
  kp::conv1d_forward<T>(g, xv.data(), wv.data(),
                        bvar.valid() ? value(bvar).data() : std::span<const T>{}, y.data());

  return push(std::move(y), any_grad({x, w, bvar}), [x, w, bvar, g](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    if (t.nodes_[x.id].requires_grad)
      kp::conv1d_backward_input<T>(g, gy, t.val(w.id).data(), t.grad_buf(x.id));
    const bool wg = t.nodes_[w.id].requires_grad;
    const bool bg = bvar.valid() && t.nodes_[bvar.id].requires_grad;
    if (wg) {
      kp::conv1d_backward_weight<T>(g, t.val(x.id).data(), gy, t.grad_buf(w.id),
                                    bg ? t.grad_buf(bvar.id) : std::span<T>{});
    } else if (bg) {
      std::span<T> gb = t.grad_buf(bvar.id);
      const std::size_t lout = g.out_length();
      for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t o = 0; o < g.out_channels; ++o)
          for (std::size_t l = 0; l < lout; ++l) gb[o] += gy[(b * g.out_channels + o) * lout + l];
    }
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::conv_transpose1d(Var x, Var w, std::optional<Var> bias,
                                                std::size_t stride, std::size_t padding,
                                                std::size_t output_padding) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& wv = value(w);
  if (xv.rank() != 3 || wv.rank() != 3)
    throw DimensionError("conv_transpose1d: expected input [B, C, L] and weight [C, O, K]");
  if (xv.dim(1) != wv.dim(0))
    throw DimensionError("conv_transpose1d: input has " + std::to_string(xv.dim(1)) +
                         " channels, weight expects " + std::to_string(wv.dim(0)));
  if (stride < 1 || output_padding >= stride)
    throw DimensionError("conv_transpose1d: need stride >= 1 and output_padding < stride");
  const std::size_t lin = xv.dim(2);
  if ((lin - 1) * stride + wv.dim(2) + output_padding < 2 * padding + 1)
    throw DimensionError("conv_transpose1d: padding too large for input length");
  const std::size_t lout = (lin - 1) * stride + wv.dim(2) + output_padding - 2 * padding;
  const Var bvar = bias.value_or(Var{});
  if (bvar.valid() && (value(bvar).rank() != 1 || value(bvar).dim(0) != wv.dim(1)))
    throw DimensionError("conv_transpose1d: bias shape " + shape_str(value(bvar).shape()));

  // Geometry of the convolution this operation is the adjoint of.
  kernels::Conv1dGeometry g{xv.dim(0), wv.dim(1), wv.dim(0), lout, wv.dim(2), stride, padding};
  if (g.out_length() != lin) throw DimensionError("conv_transpose1d: inconsistent geometry");

  Tensor<T> y({g.batch, g.in_channels, lout});
  kp::conv1d_backward_input<T>(g, xv.data(), wv.data(), y.data());
  if (bvar.valid()) {
    const Tensor<T>& bv = value(bvar);
    for (std::size_t b = 0; b < g.batch; ++b)
      for (std::size_t c = 0; c < g.in_channels; ++c)
        for (std::size_t l = 0; l < lout; ++l) y[(b * g.in_channels + c) * lout + l] += bv[c];
  }

  return push(std::move(y), any_grad({x, w, bvar}), [x, w, bvar, g](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    if (t.nodes_[x.id].requires_grad) {
      std::vector<T> tmp(g.output_size());
      kp::conv1d_forward<T>(g, gy, t.val(w.id).data(), {}, tmp);
      std::span<T> gx = t.grad_buf(x.id);
      for (std::size_t i = 0; i < tmp.size(); ++i) gx[i] += tmp[i];
    }
    if (t.nodes_[w.id].requires_grad)
      kp::conv1d_backward_weight<T>(g, gy, t.val(x.id).data(), t.grad_buf(w.id), {});
    if (bvar.valid() && t.nodes_[bvar.id].requires_grad) {
      std::span<T> gb = t.grad_buf(bvar.id);
      for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t c = 0; c < g.in_channels; ++c)
          for (std::size_t l = 0; l < g.in_length; ++l)
            gb[c] += gy[(b * g.in_channels + c) * g.in_length + l];
    }
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::relu(Var x) {
  const Tensor<T>& xv = value(x);
  Tensor<T> y(xv.shape());
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < y.numel(); ++i) {
    const bool on = xv[i] > T{0};
    y[i] = on ? xv[i] : T{0};
    word = (word << 1) | static_cast<std::uint64_t>(on);
    if (i % 64 == 63) {
      relu_pattern_ = hash64(relu_pattern_, word);
      word = 0;
    }
  }
  relu_pattern_ = hash64(relu_pattern_, word, y.numel());
  return push(std::move(y), any_grad({x}), [x](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    const Tensor<T>& xv = t.val(x.id);
    std::span<T> gx = t.grad_buf(x.id);
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xv[i] > T{0}) gx[i] += gy[i];
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::affine(Var x, Var w, std::optional<Var> bias) {
  const Tensor<T>& xv = value(x);
  const Tensor<T>& wv = value(w);
  if (xv.rank() != 2 || wv.rank() != 2 || xv.dim(1) != wv.dim(1))
    throw DimensionError("affine: input " + shape_str(xv.shape()) + " vs weight " +
                         shape_str(wv.shape()));
  const Var bvar = bias.value_or(Var{});
  if (bvar.valid() && (value(bvar).rank() != 1 || value(bvar).dim(0) != wv.dim(0)))
    throw DimensionError("affine: bias shape " + shape_str(value(bvar).shape()));

  kernels::AffineGeometry g{xv.dim(0), xv.dim(1), wv.dim(0)};
  Tensor<T> y({g.batch, g.out_features});
  kp::affine_forward<T>(g, xv.data(), wv.data(),
                        bvar.valid() ? value(bvar).data() : std::span<const T>{}, y.data());

  return push(std::move(y), any_grad({x, w, bvar}), [x, w, bvar, g](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    if (t.nodes_[x.id].requires_grad)
      kp::affine_backward_input<T>(g, gy, t.val(w.id).data(), t.grad_buf(x.id));
    const bool wg = t.nodes_[w.id].requires_grad;
    const bool bg = bvar.valid() && t.nodes_[bvar.id].requires_grad;
    if (wg) {
      kp::affine_backward_weight<T>(g, t.val(x.id).data(), gy, t.grad_buf(w.id),
                                    bg ? t.grad_buf(bvar.id) : std::span<T>{});
    } else if (bg) {
      std::span<T> gb = t.grad_buf(bvar.id);
      for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t o = 0; o < g.out_features; ++o) gb[o] += gy[b * g.out_features + o];
    }
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::flatten(Var x) {
  const Tensor<T>& xv = value(x);
  if (xv.rank() < 1) throw DimensionError("flatten: scalar input");
  return reshape(x, Shape{xv.dim(0), xv.numel() / std::max<std::size_t>(xv.dim(0), 1)});
}

template <typename T>
typename Tape<T>::Var Tape<T>::reshape(Var x, Shape shape) {
  Tensor<T> y = value(x);
  y.drop_grad();
  y.set_requires_grad(false);
  y.reshape(std::move(shape));
  return push(std::move(y), any_grad({x}), [x](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    std::span<T> gx = t.grad_buf(x.id);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::add(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  if (av.shape() != bv.shape())
    throw DimensionError("add: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = av[i] + bv[i];
  return push(std::move(y), any_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    for (Var v : {a, b}) {
      if (!t.nodes_[v.id].requires_grad) continue;
      std::span<T> g = t.grad_buf(v.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::scale(Var a, T factor) {
  const Tensor<T>& av = value(a);
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = av[i] * factor;
  return push(std::move(y), any_grad({a}), [a, factor](Tape& t, std::size_t self) {
    std::span<const T> gy = t.nodes_[self].grad;
    std::span<T> g = t.grad_buf(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i] * factor;
  });
}

template <typename T>
typename Tape<T>::Var Tape<T>::mse(Var a, Var b) {
  const Tensor<T>& av = value(a);
  const Tensor<T>& bv = value(b);
  if (av.shape() != bv.shape())
    throw DimensionError("mse: " + shape_str(av.shape()) + " vs " + shape_str(bv.shape()));
  if (av.numel() == 0) throw DimensionError("mse: empty input");
  // Accumulate in double so float training sees the same loss regardless of batch size.
  double acc = 0.0;
  for (std::size_t i = 0; i < av.numel(); ++i) {
    const double d = static_cast<double>(av[i]) - static_cast<double>(bv[i]);
    acc += d * d;
  }
  const double loss = acc / static_cast<double>(av.numel());
  if (!std::isfinite(loss)) throw NumericError("mse: non-finite loss");
  Tensor<T> y(Shape{}, std::vector<T>{static_cast<T>(loss)});
  return push(std::move(y), any_grad({a, b}), [a, b](Tape& t, std::size_t self) {
    const T gy = t.nodes_[self].grad[0];
    const Tensor<T>& av = t.val(a.id);
    const Tensor<T>& bv = t.val(b.id);
    const T k = T{2} * gy / static_cast<T>(av.numel());
    if (t.nodes_[a.id].requires_grad) {
      std::span<T> g = t.grad_buf(a.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += k * (av[i] - bv[i]);
    }
    if (t.nodes_[b.id].requires_grad) {
      std::span<T> g = t.grad_buf(b.id);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= k * (av[i] - bv[i]);
    }
  });
}

template <typename T>
void Tape<T>::backward(Var loss) {
  if (mode_ != Mode::record) throw ContractError("backward: tape is in inference mode");
  if (backward_done_) throw ContractError("backward: already run; call zero_grad() first");
  const Node& ln = node(loss);
  if ((ln.external ? *ln.external : ln.owned).numel() != 1)
    throw ContractError("backward: loss must be a scalar");
  backward_done_ = true;
  if (!ln.requires_grad) return;
  grad_buf(static_cast<std::size_t>(loss.id))[0] = T{1};

  for (std::size_t i = static_cast<std::size_t>(loss.id) + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty()) continue;
    if (n.backward) {
      n.backward(*this, i);
    } else if (n.external) {
      std::span<T> pg = n.external->grad_buffer();
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += n.grad[j];
    }
  }
}

template <typename T>
void Tape<T>::zero_grad() {
  for (Node& n : nodes_) n.grad.clear();
  backward_done_ = false;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace kjepa
