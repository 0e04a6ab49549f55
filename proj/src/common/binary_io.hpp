// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>

#include "kjepa/errors.hpp"

namespace kjepa::detail {

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void bytes(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  template <typename U>
  void le(U v) {
    if constexpr (std::endian::native == std::endian::big) {
      unsigned char b[sizeof(U)];
      std::memcpy(b, &v, sizeof(U));
      for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
      bytes(b, sizeof(U));
    } else {
      bytes(&v, sizeof(U));
    }
  }
  void f32s(std::span<const float> v) {
    if constexpr (std::endian::native == std::endian::little) {
      bytes(v.data(), v.size_bytes());
    } else {
      for (float x : v) le(std::bit_cast<std::uint32_t>(x));
    }
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string what) : is_(is), what_(std::move(what)) {}
  void bytes(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is_.gcount()) != n) throw IoError(what_ + ": truncated file");
  }
  template <typename U>
  U le() {
    unsigned char b[sizeof(U)];
    bytes(b, sizeof(U));
    if constexpr (std::endian::native == std::endian::big)
      for (std::size_t i = 0; i < sizeof(U) / 2; ++i) std::swap(b[i], b[sizeof(U) - 1 - i]);
    U v;
    std::memcpy(&v, b, sizeof(U));
    return v;
  }
  void f32s(std::span<float> v) {
    bytes(v.data(), v.size_bytes());
    if constexpr (std::endian::native == std::endian::big) {
      for (float& x : v) {
        auto* b = reinterpret_cast<unsigned char*>(&x);
        std::swap(b[0], b[3]);
        std::swap(b[1], b[2]);
      }
    }
  }

 private:
  std::istream& is_;
  std::string what_;
};

}  // namespace kjepa::detail
