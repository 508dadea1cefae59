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

#include "support.hpp"

#include <sodium.h>
#include <stdlib.h>

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "vapp/error.hpp"

namespace vapp::testing {

namespace {

using Addr = std::array<std::uint8_t, 32>;

constexpr u128 kU128Max = ~static_cast<u128>(0);

void init_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("sodium_init failed");
}

Digest tagged(std::uint8_t tag, const Digest& a, const Digest& b) {
  Bytes buf;
  buf.push_back(tag);
  buf.insert(buf.end(), a.bytes.begin(), a.bytes.end());
  buf.insert(buf.end(), b.bytes.begin(), b.bytes.end());
  return ext_sha256(buf);
}

void put_le(Bytes& out, std::uint64_t v, int width) {
  for (int i = 0; i < width; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_le128(Bytes& out, u128 v) {
  for (int i = 0; i < 16; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

u128 get_le128(const std::uint8_t* p) {
  u128 v = 0;
  for (int i = 15; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

Bytes derived_key(std::string_view prefix, const Addr& a) {
  Bytes buf(prefix.begin(), prefix.end());
  buf.insert(buf.end(), a.begin(), a.end());
  auto d = ext_sha256(buf);
  return Bytes(d.bytes.begin(), d.bytes.end());
}

Addr address_of(const PublicKey& pk) { return ext_sha256(pk).bytes; }

bool signature_ok(const TransactionEnvelope& env) {
  Bytes msg;
  put_le(msg, env.tx_kind, 2);
  put_le(msg, env.payload.size(), 4);
  msg.insert(msg.end(), env.payload.begin(), env.payload.end());
  msg.insert(msg.end(), env.sender_public_key.begin(), env.sender_public_key.end());
  put_le(msg, env.nonce, 8);
  Digest d = ext_sha256(msg);
  return crypto_sign_verify_detached(env.signature.data(), d.bytes.data(), d.bytes.size(),
                                     env.sender_public_key.data()) == 0;
}

TransactionEnvelope signed_envelope(const KeyPair& key, Bytes payload, std::uint64_t nonce) {
  TransactionEnvelope env;
  env.tx_kind = static_cast<std::uint16_t>(TxKind::kTransfer);
  env.payload = std::move(payload);
  env.sender_public_key = key.public_key();
  env.nonce = nonce;
  env.signature = sign_envelope(key, env);
  return env;
}

Bytes transfer_payload(const Address& from, const Address& to, u128 amt) {
  Bytes p(from.bytes.begin(), from.bytes.end());
  p.insert(p.end(), to.bytes.begin(), to.bytes.end());
  put_le128(p, amt);
  return p;
}

}  // namespace

Digest ext_sha256(ByteView data) {
  init_sodium();
  Digest d;
  crypto_hash_sha256(d.bytes.data(), data.data(), data.size());
  return d;
}

Digest singleton_root_oracle(ByteView key, ByteView value) {
  std::vector<Digest> defaults(kTreeDepth + 1);
  for (std::size_t h = 1; h <= kTreeDepth; ++h) defaults[h] = tagged(1, defaults[h - 1], defaults[h - 1]);
  Digest kd = ext_sha256(key);
  Bytes framed;
  put_le(framed, value.size(), 4);
  framed.insert(framed.end(), value.begin(), value.end());
  Digest acc = tagged(0, kd, ext_sha256(framed));
  for (std::size_t h = 0; h < kTreeDepth; ++h) {
    const std::size_t bit_index = kTreeDepth - 1 - h;
    const bool right = (kd.bytes[bit_index / 8] >> (7 - bit_index % 8)) & 1U;
    acc = right ? tagged(1, defaults[h], acc) : tagged(1, acc, defaults[h]);
  }
  return acc;
}

StateRoot rebuild_root(const std::map<Bytes, Bytes>& mapping) {
  AuthenticatedStore store;
  for (const auto& [k, v] : mapping) store.put(k, v);
  return store.root();
}

std::string u128_to_string(u128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

bool ReferenceInterpreter::admit(const TransactionEnvelope& env) {
  if (env.tx_kind != 1 || env.payload.size() != 80) return false;
  if (!signature_ok(env)) return false;
  return seen_.emplace(address_of(env.sender_public_key), env.nonce).second;
}

ReferenceInterpreter::Outcome ReferenceInterpreter::execute(const TransactionEnvelope& env) {
  const Addr signer = address_of(env.sender_public_key);
  Addr from, to;
  std::memcpy(from.data(), env.payload.data(), 32);
  std::memcpy(to.data(), env.payload.data() + 32, 32);
  const u128 amt = get_le128(env.payload.data() + 64);

  std::uint64_t& nonce = nonces_[signer];
  if (nonce != env.nonce || nonce == UINT64_MAX) return Outcome::kRejected;
  if (from != signer) return Outcome::kRejected;
  const u128 from_bal = balances_[from];
  const u128 to_bal = balances_[to];
  if (amt > from_bal) return Outcome::kRejected;
  if (to_bal > kU128Max - amt) return Outcome::kRejected;
  balances_[from] = from_bal - amt;
  balances_[to] += amt;
  ++nonce;
  return Outcome::kSuccess;
}

void ReferenceInterpreter::genesis(const std::vector<GenesisGrant>& grants) {
  for (const auto& g : grants) {
    u128& b = balances_[g.to.bytes];
    if (b > kU128Max - g.amount.amount) throw std::runtime_error("genesis overflow");
    b += g.amount.amount;
  }
}

StateRoot ReferenceInterpreter::root() const {
  std::map<Bytes, Bytes> mapping;
  for (const auto& [a, b] : balances_) {
    if (b == 0) continue;
    Bytes v;
    put_le128(v, b);
    mapping[derived_key("vrc20/balance", a)] = v;
  }
  for (const auto& [a, n] : nonces_) {
    if (n == 0) continue;
    Bytes v;
    put_le(v, n, 8);
    mapping[derived_key("sys/nonce", a)] = v;
  }
  return rebuild_root(mapping);
}

U256 ReferenceInterpreter::total_supply() const {
  U256 sum;
  for (const auto& [a, b] : balances_) sum.add(b);
  return sum;
}

u128 ReferenceInterpreter::balance(const Addr& address) const {
  auto it = balances_.find(address);
  return it == balances_.end() ? 0 : it->second;
}

std::uint64_t ReferenceInterpreter::nonce(const Addr& address) const {
  auto it = nonces_.find(address);
  return it == nonces_.end() ? 0 : it->second;
}

U256 store_supply(const AuthenticatedStore& store) {
  U256 sum;
  for (const auto& [k, v] : store.entries()) {
    if (v.size() == 16) sum.add(get_le128(v.data()));
  }
  return sum;
}

std::vector<Account> make_accounts(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Account> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::uint8_t, 32> s{};
    for (auto& b : s) b = static_cast<std::uint8_t>(rng());
    auto key = KeyPair::from_seed(s);
    out.push_back(Account{key, Address::from_public_key(key.public_key())});
  }
  return out;
}

Workload make_workload(std::mt19937_64& rng, std::size_t tx_count, std::size_t accounts) {
  Workload w;
  w.accounts = make_accounts(accounts, rng());
  auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };

  // Account 0 sits just below the u128 ceiling so overflow is reachable.
  w.genesis.push_back(GenesisGrant{w.accounts[0].address, Balance{kU128Max - (rng() % 1000)}});
  for (std::size_t i = 1; i < accounts; ++i) {
    w.genesis.push_back(GenesisGrant{w.accounts[i].address, Balance{1 + rng() % 1'000'000}});
  }

  ReferenceInterpreter truth;
  truth.genesis(w.genesis);
  auto push = [&](TransactionEnvelope env) {
    if (truth.admit(env)) truth.execute(env);
    w.envelopes.push_back(std::move(env));
  };

  while (w.envelopes.size() < tx_count) {
    const std::size_t s = 1 + pick(accounts - 1);
    const Account& from = w.accounts[s];
    const Account& to = w.accounts[pick(accounts)];
    const std::uint64_t nonce = truth.nonce(from.address.bytes);
    const u128 bal = truth.balance(from.address.bytes);
    const int roll = static_cast<int>(rng() % 100);

    if (roll < 55) {
      const u128 amt = bal == 0 ? 0 : static_cast<u128>(rng()) % (bal / 2 + 1);
      push(signed_envelope(from.key, transfer_payload(from.address, to.address, amt), nonce));
    } else if (roll < 60) {
      const u128 amt = bal == 0 ? 0 : static_cast<u128>(rng()) % (bal + 1);
      push(signed_envelope(from.key, transfer_payload(from.address, from.address, amt), nonce));
    } else if (roll < 68) {
      push(signed_envelope(from.key, transfer_payload(from.address, to.address, bal + 1 + rng() % 50),
                           nonce));
    } else if (roll < 73) {
      // Credit that would push the near-ceiling account past u128.
      const u128 room = kU128Max - truth.balance(w.accounts[0].address.bytes);
      if (room >= bal) continue;
      const u128 amt = room + 1 + static_cast<u128>(rng()) % (bal - room);
      push(signed_envelope(from.key, transfer_payload(from.address, w.accounts[0].address, amt),
                           nonce));
    } else if (roll < 78) {
      push(signed_envelope(from.key, transfer_payload(from.address, to.address, 1),
                           nonce + 1 + rng() % 3));
    } else if (roll < 81) {
      if (nonce == 0) continue;
      push(signed_envelope(from.key, transfer_payload(from.address, to.address, 1), nonce - 1));
    } else if (roll < 86) {
      auto env = signed_envelope(from.key, transfer_payload(from.address, to.address, 1), nonce);
      env.signature[pick(64)] ^= static_cast<std::uint8_t>(1U << pick(8));
      push(std::move(env));
    } else if (roll < 89) {
      auto payload = transfer_payload(from.address, to.address, 1);
      payload.resize(pick(80));
      push(signed_envelope(from.key, std::move(payload), nonce));
    } else if (roll < 94) {
      const Account& other = w.accounts[1 + (s % (accounts - 1))];
      if (other.address == from.address) continue;
      push(signed_envelope(from.key, transfer_payload(other.address, to.address, 1), nonce));
    } else if (roll < 97) {
      if (w.envelopes.empty()) continue;
      push(w.envelopes[pick(w.envelopes.size())]);
    } else {
      // The near-ceiling account spends a little.
      const Account& whale = w.accounts[0];
      push(signed_envelope(whale.key, transfer_payload(whale.address, to.address, 1 + rng() % 100),
                           truth.nonce(whale.address.bytes)));
    }
  }
  return w;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "vapp-test-XXXXXX").string();
  if (mkdtemp(tmpl.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void seed_sequencer_key(const std::filesystem::path& data_dir, std::uint8_t fill) {
  std::filesystem::create_directories(data_dir);
  std::array<std::uint8_t, 32> seed{};
  seed.fill(fill);
  std::string hex = to_hex(seed) + "\n";
  write_file_bytes(data_dir / "sequencer.key", as_bytes(hex));
}

NodeConfig make_config(const std::filesystem::path& data_dir, ProofMode mode,
                       std::size_t max_batch, const std::vector<GenesisGrant>& genesis) {
  NodeConfig c;
  c.data_dir = data_dir;
  c.mode = mode;
  c.max_batch_size = max_batch;
  c.genesis = genesis;
  return c;
}

}  // namespace vapp::testing
