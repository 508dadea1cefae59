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

#include <array>
#include <cstdint>
#include <initializer_list>
#include <memory>

#include "vapp/bytes.hpp"

namespace vapp {

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(ByteView data);
  Sha256& update(std::uint8_t byte) { return update(ByteView(&byte, 1)); }
  Sha256& update(const Digest& d) { return update(d.view()); }
  Digest finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Digest sha256(ByteView data);

/// H(tag || a || b) for 65-byte node/leaf preimages. This is the hot path of
/// the sparse Merkle tree.
Digest hash_tagged_pair(std::uint8_t tag, const Digest& a, const Digest& b);

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

/// Ed25519 keypair derived from a 32-byte seed.
class KeyPair {
 public:
  static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
  static KeyPair generate();

  const PublicKey& public_key() const { return public_key_; }
  const std::array<std::uint8_t, 32>& seed() const { return seed_; }

  Signature sign(ByteView message) const;

 private:
  std::array<std::uint8_t, 32> seed_{};
  PublicKey public_key_{};
  std::array<std::uint8_t, 64> secret_key_{};
};

/// Returns false for malformed keys or signatures; never throws.
bool verify_signature(const PublicKey& key, ByteView message,
                      const Signature& signature);

}  // namespace vapp
