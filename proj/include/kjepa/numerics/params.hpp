// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kjepa/numerics/tensor.hpp"

namespace kjepa {

/// Named parameter tensors in insertion order. Addresses of stored tensors are
/// stable for the lifetime of the set (tapes bind them by reference).
template <typename T>
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet& other) { *this = other; }
  ParamSet& operator=(const ParamSet& other) {
    if (this == &other) return *this;
    entries_.clear();
    index_.clear();
    for (const auto& [name, t] : other.entries_) add(name, *t);
    return *this;
  }
  ParamSet(ParamSet&&) noexcept = default;
  ParamSet& operator=(ParamSet&&) noexcept = default;

  Tensor<T>& add(std::string name, Tensor<T> t) {
    if (index_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
    index_.emplace(name, entries_.size());
    entries_.emplace_back(std::move(name), std::make_unique<Tensor<T>>(std::move(t)));
    return *entries_.back().second;
  }

  bool contains(std::string_view name) const { return index_.count(std::string(name)) != 0; }

  Tensor<T>& at(std::string_view name) { return *entries_.at(lookup(name)).second; }
  const Tensor<T>& at(std::string_view name) const { return *entries_.at(lookup(name)).second; }

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::string& name(std::size_t i) const { return entries_.at(i).first; }
  Tensor<T>& tensor(std::size_t i) { return *entries_.at(i).second; }
  const Tensor<T>& tensor(std::size_t i) const { return *entries_.at(i).second; }

  std::size_t total_numel() const noexcept {
    std::size_t n = 0;
    for (const auto& e : entries_) n += e.second->numel();
    return n;
  }

  void zero_grad() {
    for (auto& e : entries_) e.second->zero_grad();
  }

  void set_requires_grad(bool on) {
    for (auto& e : entries_) e.second->set_requires_grad(on);
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (const auto& [name, t] : entries_) out.add(name, t->template cast<U>());
    return out;
  }

 private:
  std::size_t lookup(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) throw ContractError("unknown parameter '" + std::string(name) + "'");
    return it->second;
  }

  std::vector<std::pair<std::string, std::unique_ptr<Tensor<T>>>> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace kjepa
