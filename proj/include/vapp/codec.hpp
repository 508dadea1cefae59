// Copyright 2026 The vappkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>

#include "vapp/bytes.hpp"
#include "vapp/error.hpp"

namespace vapp {

__extension__ typedef unsigned __int128 u128;

/// Canonical binary encoding. Unsigned integers are fixed-width
/// little-endian, fixed arrays are raw, variable sequences carry a 4-byte
/// little-endian count prefix.
class Encoder {
 public:
  Encoder& u8(std::uint8_t v) {
    out_.push_back(v);
    return *this;
  }
  Encoder& u16(std::uint16_t v) { return le(v, 2); }
  Encoder& u32(std::uint32_t v) { return le(v, 4); }
  Encoder& u64(std::uint64_t v) { return le(v, 8); }
  Encoder& u128v(u128 v);
  Encoder& raw(ByteView bytes) {
    out_.insert(out_.end(), bytes.begin(), bytes.end());
    return *this;
  }
  Encoder& digest(const Digest& d) { return raw(d.view()); }
  Encoder& var_bytes(ByteView bytes);
  Encoder& opt_bytes(const std::optional<Bytes>& bytes);

  const Bytes& bytes() const& { return out_; }
  Bytes take() && { return std::move(out_); }
  std::size_t size() const { return out_.size(); }

 private:
  Encoder& le(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  Bytes out_;
};

/// Strict decoder: any short read or invalid tag throws Error(kMalformed).
class Decoder {
 public:
  explicit Decoder(ByteView in) : in_(in) {}

  std::uint8_t u8();
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  u128 u128v();
  ByteView raw(std::size_t n);
  Digest digest();
  Bytes var_bytes();
  std::optional<Bytes> opt_bytes();
  bool boolean();

  /// Count prefix for a sequence whose elements occupy at least
  /// `min_element_size` bytes each; rejects counts the input cannot hold.
  std::uint32_t count(std::size_t min_element_size);

  std::size_t remaining() const { return in_.size() - pos_; }
  std::size_t position() const { return pos_; }
  void expect_end() const;

 private:
  std::uint64_t le(int width);
  ByteView in_;
  std::size_t pos_ = 0;
};

}  // namespace vapp
