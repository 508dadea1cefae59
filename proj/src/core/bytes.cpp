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

#include "vapp/bytes.hpp"

#include <cstring>

#include "vapp/codec.hpp"
#include "vapp/error.hpp"

namespace vapp {

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

bool Digest::is_zero() const {
  for (auto b : bytes) {
    if (b != 0) return false;
  }
  return true;
}

std::string Digest::hex() const { return to_hex(view()); }

Digest Digest::from_hex(std::string_view hex) {
  return from_bytes(vapp::from_hex(hex));
}

Digest Digest::from_bytes(ByteView in) {
  if (in.size() != kSize) {
    throw Error(ErrorCode::kInvalidArgument,
                "digest must be 32 bytes, got " + std::to_string(in.size()));
  }
  Digest d;
  std::memcpy(d.bytes.data(), in.data(), kSize);
  return d;
}

std::size_t DigestHash::operator()(const Digest& d) const noexcept {
  std::uint64_t h;
  std::memcpy(&h, d.bytes.data(), sizeof(h));
  return static_cast<std::size_t>(h);
}

std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) {
    hex.remove_prefix(2);
  }
  if (hex.size() % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument, "odd-length hex string");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorCode::kInvalidArgument, "invalid hex digit");
    }
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

Encoder& Encoder::u128v(u128 v) {
  for (int i = 0; i < 16; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  return *this;
}

Encoder& Encoder::var_bytes(ByteView bytes) {
  u32(static_cast<std::uint32_t>(bytes.size()));
  return raw(bytes);
}

Encoder& Encoder::opt_bytes(const std::optional<Bytes>& bytes) {
  if (!bytes) return u8(0);
  u8(1);
  return var_bytes(*bytes);
}

std::uint64_t Decoder::le(int width) {
  auto span = raw(static_cast<std::size_t>(width));
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(span[i]) << (8 * i);
  return v;
}

std::uint8_t Decoder::u8() { return raw(1)[0]; }

u128 Decoder::u128v() {
  auto span = raw(16);
  u128 v = 0;
  for (int i = 0; i < 16; ++i) v |= static_cast<u128>(span[i]) << (8 * i);
  return v;
}

ByteView Decoder::raw(std::size_t n) {
  if (remaining() < n) {
    throw Error(ErrorCode::kMalformed, "truncated input at offset " + std::to_string(pos_));
  }
  ByteView out = in_.subspan(pos_, n);
  pos_ += n;
  return out;
}

Digest Decoder::digest() { return Digest::from_bytes(raw(Digest::kSize)); }

Bytes Decoder::var_bytes() {
  auto n = u32();
  auto span = raw(n);
  return Bytes(span.begin(), span.end());
}

std::optional<Bytes> Decoder::opt_bytes() {
  if (!boolean()) return std::nullopt;
  return var_bytes();
}

bool Decoder::boolean() {
  auto tag = u8();
  if (tag > 1) throw Error(ErrorCode::kMalformed, "invalid boolean tag");
  return tag == 1;
}

std::uint32_t Decoder::count(std::size_t min_element_size) {
  auto n = u32();
  if (min_element_size > 0 && n > remaining() / min_element_size) {
    throw Error(ErrorCode::kMalformed, "sequence count exceeds input");
  }
  return n;
}

void Decoder::expect_end() const {
  if (remaining() != 0) {
    throw Error(ErrorCode::kMalformed,
                std::to_string(remaining()) + " trailing bytes");
  }
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMalformed: return "Malformed";
    case ErrorCode::kEmptyBatch: return "EmptyBatch";
    case ErrorCode::kOutOfOrder: return "OutOfOrder";
    case ErrorCode::kProofInvalid: return "ProofInvalid";
    case ErrorCode::kRootMismatch: return "RootMismatch";
    case ErrorCode::kNotFinalized: return "NotFinalized";
    case ErrorCode::kChainMismatch: return "ChainMismatch";
    case ErrorCode::kStaleCheckpoint: return "StaleCheckpoint";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kCorrupt: return "Corrupt";
    case ErrorCode::kNoWork: return "NoWork";
    case ErrorCode::kIo: return "Io";
    case ErrorCode::kSettlementRejected: return "SettlementRejected";
  }
  return "Unknown";
}

}  // namespace vapp
