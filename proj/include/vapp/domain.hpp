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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vapp/bytes.hpp"
#include "vapp/codec.hpp"
#include "vapp/crypto.hpp"

namespace vapp {

struct Address {
  std::array<std::uint8_t, 32> bytes{};

  static Address from_public_key(const PublicKey& key);
  static Address from_hex(std::string_view hex);
  std::string hex() const { return to_hex(bytes); }

  friend bool operator==(const Address&, const Address&) = default;
  friend auto operator<=>(const Address&, const Address&) = default;
};

/// Unsigned 128-bit token amount. Arithmetic is always checked.
struct Balance {
  u128 amount = 0;

  static constexpr u128 kMax = ~static_cast<u128>(0);

  std::optional<Balance> checked_add(Balance other) const {
    if (amount > kMax - other.amount) return std::nullopt;
    return Balance{amount + other.amount};
  }
  std::optional<Balance> checked_sub(Balance other) const {
    if (other.amount > amount) return std::nullopt;
    return Balance{amount - other.amount};
  }

  std::string to_string() const;
  /// Decimal digits only; throws Error(kInvalidArgument) on overflow or junk.
  static Balance parse(std::string_view decimal);

  friend bool operator==(const Balance&, const Balance&) = default;
  friend auto operator<=>(const Balance&, const Balance&) = default;
};

enum class TxKind : std::uint16_t {
  kGenesis = 0x0000,
  kTransfer = 0x0001,
};

struct TransferTx {
  Address from;
  Address to;
  Balance amt;

  friend bool operator==(const TransferTx&, const TransferTx&) = default;
};

struct GenesisGrant {
  Address to;
  Balance amount;

  friend bool operator==(const GenesisGrant&, const GenesisGrant&) = default;
};

/// Initial funding. Only valid as the first transaction applied to the
/// empty state; carries no signature.
struct GenesisTx {
  std::vector<GenesisGrant> grants;
};

struct TransferEvent {
  Address from;
  Address to;
  Balance amt;

  friend bool operator==(const TransferEvent&, const TransferEvent&) = default;
};

struct TransactionEnvelope {
  std::uint16_t tx_kind = 0;
  Bytes payload;
  PublicKey sender_public_key{};
  std::uint64_t nonce = 0;
  Signature signature{};

  Address sender() const { return Address::from_public_key(sender_public_key); }

  friend bool operator==(const TransactionEnvelope&, const TransactionEnvelope&) = default;
};

/// C: Merkle root over ordered envelope digests.
struct BatchCommitment {
  Digest digest;
  std::uint32_t tx_count = 0;

  friend bool operator==(const BatchCommitment&, const BatchCommitment&) = default;
};

void encode(Encoder& enc, const Address& a);
void encode(Encoder& enc, const Balance& b);
void encode(Encoder& enc, const TransferTx& tx);
void encode(Encoder& enc, const GenesisTx& tx);
void encode(Encoder& enc, const TransferEvent& ev);
void encode(Encoder& enc, const TransactionEnvelope& env);
void encode(Encoder& enc, const BatchCommitment& c);

Address decode_address(Decoder& dec);
Balance decode_balance(Decoder& dec);
TransferTx decode_transfer(Decoder& dec);
GenesisTx decode_genesis(Decoder& dec);
TransferEvent decode_transfer_event(Decoder& dec);
TransactionEnvelope decode_envelope(Decoder& dec);
BatchCommitment decode_batch_commitment(Decoder& dec);

/// Encodes a single value with a fresh Encoder.
template <typename T>
Bytes canonical_encode(const T& value) {
  Encoder enc;
  encode(enc, value);
  return std::move(enc).take();
}

/// Strict whole-buffer decode of a transfer payload.
std::optional<TransferTx> parse_transfer_payload(ByteView payload);
std::optional<GenesisTx> parse_genesis_payload(ByteView payload);

Digest envelope_digest(const TransactionEnvelope& env);
/// H(tx_kind || payload || sender_public_key || nonce); what the signature covers.
Digest signing_digest(const TransactionEnvelope& env);
Signature sign_envelope(const KeyPair& key, const TransactionEnvelope& env);
bool verify_envelope_signature(const TransactionEnvelope& env);

TransactionEnvelope make_transfer(const KeyPair& key, const Address& to, Balance amt,
                                  std::uint64_t nonce);
TransactionEnvelope make_genesis(const std::vector<GenesisGrant>& grants);

/// Throws Error(kEmptyBatch) for an empty list.
BatchCommitment batch_commitment(std::span<const Digest> digests);
/// Sibling path (leaf-adjacent first) for `index` in the commitment tree.
std::vector<Digest> batch_inclusion_path(std::span<const Digest> digests, std::size_t index);
bool verify_batch_inclusion(const BatchCommitment& c, const Digest& leaf, std::size_t index,
                            std::span<const Digest> path);

// State layout inside the authenticated store.
Bytes balance_key(const Address& a);
Bytes nonce_key(const Address& a);
Bytes encode_balance_value(Balance b);
std::optional<Balance> decode_balance_value(ByteView bytes);
Bytes encode_nonce_value(std::uint64_t nonce);
std::optional<std::uint64_t> decode_nonce_value(ByteView bytes);

}  // namespace vapp
