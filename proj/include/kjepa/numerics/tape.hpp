// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "kjepa/numerics/tensor.hpp"

namespace kjepa {

/// Reverse-mode autodiff tape.
///
/// Operations are appended in evaluation order, so the node list is already
/// topologically sorted; backward() walks it once in reverse. Parameters are
/// bound by reference: their gradients are accumulated into the Tensor's own
/// grad buffer when backward() reaches them, so one tensor bound at several
/// sites receives the sum of all contributions.
///
/// In inference mode nothing requires grad and no backward closures are kept.
template <typename T>
class Tape {
 public:
  struct Var {
    std::int32_t id = -1;
    bool valid() const noexcept { return id >= 0; }
  };

  enum class Mode { record, inference };

  explicit Tape(Mode mode = Mode::record) : mode_(mode) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  /// A value that never receives a gradient (inputs, stop-gradient targets).
  Var constant(Tensor<T> value);
  /// Binds an externally owned tensor; it must outlive the tape.
  /// Gradients flow to it iff p.requires_grad() and the tape is recording.
  Var parameter(Tensor<T>& p);

  /// x [B, Cin, L], w [Cout, Cin, K], bias [Cout] -> [B, Cout, Lout].
  Var conv1d(Var x, Var w, std::optional<Var> bias, std::size_t stride, std::size_t padding);
  /// Adjoint of conv1d. x [B, Cin, L], w [Cin, Cout, K] -> [B, Cout, (L-1)s - 2p + K + op].
  Var conv_transpose1d(Var x, Var w, std::optional<Var> bias, std::size_t stride,
                       std::size_t padding, std::size_t output_padding);
  Var relu(Var x);
  /// x [B, in], w [out, in], bias [out] -> [B, out].
  Var affine(Var x, Var w, std::optional<Var> bias);
  /// [B, d1, d2, ...] -> [B, d1*d2*...].
  Var flatten(Var x);
  Var reshape(Var x, Shape shape);
  Var add(Var a, Var b);
  Var scale(Var a, T factor);
  /// Mean of squared differences over every element. Throws NumericError if non-finite.
  Var mse(Var a, Var b);

  const Tensor<T>& value(Var v) const;
  /// Gradient w.r.t. an intermediate node; empty if backward never reached it.
  std::span<const T> grad(Var v) const;
  bool requires_grad(Var v) const;

  /// Populates gradients from a scalar loss. A second call needs zero_grad() first.
  void backward(Var loss);
  /// Clears node gradients so backward() can run again. Parameter grad buffers are
  /// owned by the parameters and are not touched.
  void zero_grad();

  std::size_t size() const noexcept { return nodes_.size(); }
  Mode mode() const noexcept { return mode_; }
  /// Order-sensitive hash of every ReLU on/off mask recorded so far.
  std::uint64_t relu_pattern() const noexcept { return relu_pattern_; }

 private:
  using BackwardFn = std::function<void(Tape&, std::size_t)>;

  struct Node {
    Tensor<T> owned;
    Tensor<T>* external = nullptr;
    bool requires_grad = false;
    std::vector<T> grad;
    BackwardFn backward;
  };

  const Node& node(Var v) const;
  Node& node(Var v);
  Tensor<T>& val(std::size_t id) {
    return nodes_[id].external ? *nodes_[id].external : nodes_[id].owned;
  }
  std::span<T> grad_buf(std::size_t id);
  Var push(Tensor<T> value, bool requires_grad, BackwardFn fn);
  bool any_grad(std::initializer_list<Var> vs) const;

  Mode mode_;
  std::vector<Node> nodes_;
  bool backward_done_ = false;
  std::uint64_t relu_pattern_ = 0;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace kjepa
