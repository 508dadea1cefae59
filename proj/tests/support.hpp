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
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vapp/node.hpp"

namespace vapp::testing {

/// SHA-256 through libsodium, independent of the library's OpenSSL path.
Digest ext_sha256(ByteView data);

/// Brute-force root of a single-entry tree: hash the leaf, then fold 256
/// default siblings computed from scratch.
Digest singleton_root_oracle(ByteView key, ByteView value);

/// Root of a mapping by building a fresh store entry by entry.
StateRoot rebuild_root(const std::map<Bytes, Bytes>& mapping);

/// 256-bit unsigned accumulator for summing u128 balances.
struct U256 {
  u128 lo = 0;
  u128 hi = 0;

  void add(u128 v) {
    u128 next = lo + v;
    if (next < lo) ++hi;
    lo = next;
  }
  friend bool operator==(const U256&, const U256&) = default;
};

std::string u128_to_string(u128 v);

/// Plain interpreter of the token semantics over ordinary maps. Mirrors
/// sequencer admission and S0-S4 without any Merkle machinery; signatures
/// are checked directly with libsodium.
class ReferenceInterpreter {
 public:
  enum class Outcome { kDropped, kSuccess, kRejected };

  /// Stateless admission: transfer kind, 80-byte payload, valid signature,
  /// fresh (sender, nonce).
  bool admit(const TransactionEnvelope& env);
  /// Executes an admitted envelope in order.
  Outcome execute(const TransactionEnvelope& env);
  void genesis(const std::vector<GenesisGrant>& grants);

  /// Root of the equivalent state, built into a fresh authenticated store
  /// with independently derived keys.
  StateRoot root() const;
  U256 total_supply() const;
  u128 balance(const std::array<std::uint8_t, 32>& address) const;
  std::uint64_t nonce(const std::array<std::uint8_t, 32>& address) const;

 private:
  std::map<std::array<std::uint8_t, 32>, u128> balances_;
  std::map<std::array<std::uint8_t, 32>, std::uint64_t> nonces_;
  std::set<std::pair<std::array<std::uint8_t, 32>, std::uint64_t>> seen_;
};

/// Sum of all balances currently in a store.
U256 store_supply(const AuthenticatedStore& store);

struct Account {
  KeyPair key;
  Address address;
};

std::vector<Account> make_accounts(std::size_t n, std::uint64_t seed);

struct Workload {
  std::vector<Account> accounts;
  std::vector<GenesisGrant> genesis;
  std::vector<TransactionEnvelope> envelopes;
};

/// Random mix of valid transfers and stateless/stateful failures: bad
/// signature, bad format, stale or future nonce, sender mismatch,
/// insufficient funds, overflow, duplicates, self-transfers.
Workload make_workload(std::mt19937_64& rng, std::size_t tx_count, std::size_t accounts = 6);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Writes a deterministic sequencer key into `data_dir`.
void seed_sequencer_key(const std::filesystem::path& data_dir, std::uint8_t fill);

NodeConfig make_config(const std::filesystem::path& data_dir, ProofMode mode,
                       std::size_t max_batch, const std::vector<GenesisGrant>& genesis);

}  // namespace vapp::testing
