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

#include "vapp/domain.hpp"

#include <algorithm>
#include <cstring>

#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr std::string_view kBalancePrefix = "vrc20/balance";
constexpr std::string_view kNoncePrefix = "sys/nonce";

Bytes namespaced_key(std::string_view prefix, const Address& a) {
  Sha256 h;
  h.update(as_bytes(prefix)).update(ByteView(a.bytes));
  auto d = h.finish();
  return Bytes(d.bytes.begin(), d.bytes.end());
}

// Layer-by-layer Merkle reduction used by both the commitment and the
// inclusion path. Odd layers are padded with the zero digest.
std::vector<Digest> next_layer(const std::vector<Digest>& layer) {
  std::vector<Digest> out;
  out.reserve((layer.size() + 1) / 2);
  for (std::size_t i = 0; i < layer.size(); i += 2) {
    const Digest& right = i + 1 < layer.size() ? layer[i + 1] : Digest::zero();
    out.push_back(hash_tagged_pair(0x01, layer[i], right));
  }
  return out;
}

}  // namespace

Address Address::from_public_key(const PublicKey& key) {
  Address a;
  a.bytes = sha256(ByteView(key)).bytes;
  return a;
}

Address Address::from_hex(std::string_view hex) {
  Address a;
  a.bytes = Digest::from_hex(hex).bytes;
  return a;
}

std::string Balance::to_string() const {
  if (amount == 0) return "0";
  std::string out;
  u128 v = amount;
  while (v > 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

Balance Balance::parse(std::string_view decimal) {
  if (decimal.empty()) throw Error(ErrorCode::kInvalidArgument, "empty amount");
  u128 v = 0;
  for (char c : decimal) {
    if (c < '0' || c > '9') throw Error(ErrorCode::kInvalidArgument, "amount must be decimal");
    auto digit = static_cast<u128>(c - '0');
    if (v > (kMax - digit) / 10) throw Error(ErrorCode::kInvalidArgument, "amount overflows u128");
    v = v * 10 + digit;
  }
  return Balance{v};
}

void encode(Encoder& enc, const Address& a) { enc.raw(a.bytes); }
void encode(Encoder& enc, const Balance& b) { enc.u128v(b.amount); }

void encode(Encoder& enc, const TransferTx& tx) {
  encode(enc, tx.from);
  encode(enc, tx.to);
  encode(enc, tx.amt);
}

void encode(Encoder& enc, const GenesisTx& tx) {
  enc.u32(static_cast<std::uint32_t>(tx.grants.size()));
  for (const auto& g : tx.grants) {
    encode(enc, g.to);
    encode(enc, g.amount);
  }
}

void encode(Encoder& enc, const TransferEvent& ev) {
  encode(enc, ev.from);
  encode(enc, ev.to);
  encode(enc, ev.amt);
}

void encode(Encoder& enc, const TransactionEnvelope& env) {
  enc.u16(env.tx_kind);
  enc.var_bytes(env.payload);
  enc.raw(env.sender_public_key);
  enc.u64(env.nonce);
  enc.raw(env.signature);
}

void encode(Encoder& enc, const BatchCommitment& c) {
  enc.digest(c.digest);
  enc.u32(c.tx_count);
}

Address decode_address(Decoder& dec) {
  Address a;
  auto span = dec.raw(32);
  std::copy(span.begin(), span.end(), a.bytes.begin());
  return a;
}

Balance decode_balance(Decoder& dec) { return Balance{dec.u128v()}; }

TransferTx decode_transfer(Decoder& dec) {
  TransferTx tx;
  tx.from = decode_address(dec);
  tx.to = decode_address(dec);
  tx.amt = decode_balance(dec);
  return tx;
}

GenesisTx decode_genesis(Decoder& dec) {
  GenesisTx tx;
  auto n = dec.count(48);
  tx.grants.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    GenesisGrant g;
    g.to = decode_address(dec);
    g.amount = decode_balance(dec);
    tx.grants.push_back(g);
  }
  return tx;
}

TransferEvent decode_transfer_event(Decoder& dec) {
  TransferEvent ev;
  ev.from = decode_address(dec);
  ev.to = decode_address(dec);
  ev.amt = decode_balance(dec);
  return ev;
}

TransactionEnvelope decode_envelope(Decoder& dec) {
  TransactionEnvelope env;
  env.tx_kind = dec.u16();
  env.payload = dec.var_bytes();
  auto pk = dec.raw(32);
  std::copy(pk.begin(), pk.end(), env.sender_public_key.begin());
  env.nonce = dec.u64();
  auto sig = dec.raw(64);
  std::copy(sig.begin(), sig.end(), env.signature.begin());
  return env;
}

BatchCommitment decode_batch_commitment(Decoder& dec) {
  BatchCommitment c;
  c.digest = dec.digest();
  c.tx_count = dec.u32();
  return c;
}

std::optional<TransferTx> parse_transfer_payload(ByteView payload) {
  try {
    Decoder dec(payload);
    auto tx = decode_transfer(dec);
    dec.expect_end();
    return tx;
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::optional<GenesisTx> parse_genesis_payload(ByteView payload) {
  try {
    Decoder dec(payload);
    auto tx = decode_genesis(dec);
    dec.expect_end();
    return tx;
  } catch (const Error&) {
    return std::nullopt;
  }
}

Digest envelope_digest(const TransactionEnvelope& env) {
  return sha256(canonical_encode(env));
}

Digest signing_digest(const TransactionEnvelope& env) {
  Encoder enc;
  enc.u16(env.tx_kind);
  enc.var_bytes(env.payload);
  enc.raw(env.sender_public_key);
  enc.u64(env.nonce);
  return sha256(enc.bytes());
}

Signature sign_envelope(const KeyPair& key, const TransactionEnvelope& env) {
  return key.sign(signing_digest(env).view());
}

bool verify_envelope_signature(const TransactionEnvelope& env) {
  return verify_signature(env.sender_public_key, signing_digest(env).view(), env.signature);
}

TransactionEnvelope make_transfer(const KeyPair& key, const Address& to, Balance amt,
                                  std::uint64_t nonce) {
  TransactionEnvelope env;
  env.tx_kind = static_cast<std::uint16_t>(TxKind::kTransfer);
  env.payload = canonical_encode(
      TransferTx{Address::from_public_key(key.public_key()), to, amt});
  env.sender_public_key = key.public_key();
  env.nonce = nonce;
  env.signature = sign_envelope(key, env);
  return env;
}

TransactionEnvelope make_genesis(const std::vector<GenesisGrant>& grants) {
  TransactionEnvelope env;
  env.tx_kind = static_cast<std::uint16_t>(TxKind::kGenesis);
  env.payload = canonical_encode(GenesisTx{grants});
  return env;
}

BatchCommitment batch_commitment(std::span<const Digest> digests) {
  if (digests.empty()) throw Error(ErrorCode::kEmptyBatch, "cannot commit to an empty batch");
  std::vector<Digest> layer(digests.begin(), digests.end());
  while (layer.size() > 1) layer = next_layer(layer);
  return BatchCommitment{layer.front(), static_cast<std::uint32_t>(digests.size())};
}

std::vector<Digest> batch_inclusion_path(std::span<const Digest> digests, std::size_t index) {
  if (index >= digests.size()) throw Error(ErrorCode::kInvalidArgument, "index out of range");
  std::vector<Digest> path;
  std::vector<Digest> layer(digests.begin(), digests.end());
  while (layer.size() > 1) {
    std::size_t sibling = index ^ 1U;
    path.push_back(sibling < layer.size() ? layer[sibling] : Digest::zero());
    layer = next_layer(layer);
    index /= 2;
  }
  return path;
}

bool verify_batch_inclusion(const BatchCommitment& c, const Digest& leaf, std::size_t index,
                            std::span<const Digest> path) {
  if (index >= c.tx_count) return false;
  std::size_t expected_depth = 0;
  for (std::size_t width = c.tx_count; width > 1; width = (width + 1) / 2) ++expected_depth;
  if (path.size() != expected_depth) return false;
  Digest acc = leaf;
  for (const auto& sibling : path) {
    acc = (index & 1U) ? hash_tagged_pair(0x01, sibling, acc) : hash_tagged_pair(0x01, acc, sibling);
    index /= 2;
  }
  return acc == c.digest;
}

Bytes balance_key(const Address& a) { return namespaced_key(kBalancePrefix, a); }
Bytes nonce_key(const Address& a) { return namespaced_key(kNoncePrefix, a); }

Bytes encode_balance_value(Balance b) { return canonical_encode(b); }

std::optional<Balance> decode_balance_value(ByteView bytes) {
  if (bytes.size() != 16) return std::nullopt;
  Decoder dec(bytes);
  return decode_balance(dec);
}

Bytes encode_nonce_value(std::uint64_t nonce) {
  Encoder enc;
  enc.u64(nonce);
  return std::move(enc).take();
}

std::optional<std::uint64_t> decode_nonce_value(ByteView bytes) {
  if (bytes.size() != 8) return std::nullopt;
  Decoder dec(bytes);
  return dec.u64();
}

}  // namespace vapp
