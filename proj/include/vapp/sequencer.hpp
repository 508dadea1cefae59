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
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "vapp/authenticated_store.hpp"
#include "vapp/domain.hpp"

namespace vapp {

enum class AdmitError : std::uint8_t {
  kBadFormat = 1,
  kBadSignature = 2,
  kDuplicateNonce = 3,
};

const char* admit_error_name(AdmitError e);

/// Sequencer-signed binding of an envelope digest to its arrival position.
struct Preconfirmation {
  Digest envelope_digest;
  std::uint64_t sequence = 0;
  Signature signature{};

  friend bool operator==(const Preconfirmation&, const Preconfirmation&) = default;
};

/// H(envelope_digest || sequence as u64 LE).
Digest preconfirmation_message(const Digest& envelope_digest, std::uint64_t sequence);
bool verify_preconfirmation(const Preconfirmation& p, const PublicKey& sequencer_key);

struct SubmitOutcome {
  std::optional<Preconfirmation> preconfirmation;
  std::optional<AdmitError> error;

  bool admitted() const { return preconfirmation.has_value(); }
};

struct PendingEnvelope {
  std::uint64_t sequence = 0;
  TransactionEnvelope envelope;
};

/// Pending envelopes in arrival order, at most one per (sender, nonce).
class Mempool {
 public:
  /// Returns false when (sender, nonce) was ever admitted before.
  bool admit(std::uint64_t sequence, const TransactionEnvelope& env);
  /// Marks (sender, nonce) as used without queueing anything.
  void remember(const TransactionEnvelope& env);
  std::vector<PendingEnvelope> drain(std::size_t max);
  std::size_t size() const { return pending_.size(); }
  bool empty() const { return pending_.empty(); }
  std::vector<PendingEnvelope> snapshot() const;
  std::size_t pending_from(const Address& sender) const;

 private:
  std::map<std::uint64_t, TransactionEnvelope> pending_;
  std::set<std::pair<Address, std::uint64_t>> seen_;
};

/// Sealed batch as published to the DA log. The roots are filled once the
/// batch has been executed.
struct Batch {
  std::uint64_t batch_index = 0;
  std::uint64_t first_sequence = 0;
  std::vector<TransactionEnvelope> envelopes;
  BatchCommitment commitment;
  StateRoot pre_root;
  StateRoot post_root;

  friend bool operator==(const Batch&, const Batch&) = default;
};

void encode(Encoder& enc, const Batch& b);
/// Strict whole-buffer decode.
Batch decode_batch(ByteView bytes);

class Sequencer {
 public:
  explicit Sequencer(KeyPair key, std::uint64_t next_batch_index = 0,
                     std::uint64_t next_sequence = 0);

  /// Stateless admission: format and signature only. Thread-safe.
  SubmitOutcome submit(const TransactionEnvelope& env);
  /// Queues the unsigned genesis envelope; only before anything else.
  void submit_genesis(const TransactionEnvelope& env);
  /// Drains up to `max_size` envelopes in arrival order. Throws kNoWork.
  Batch seal_batch(std::size_t max_size);

  /// Recovery hooks.
  void restore_pending(const PendingEnvelope& p);
  void remember_published(const Batch& batch);

  const PublicKey& public_key() const { return key_.public_key(); }
  std::uint64_t next_batch_index() const;
  std::uint64_t next_sequence() const;
  std::vector<PendingEnvelope> pending() const;
  std::size_t pending_from(const Address& sender) const;

 private:
  KeyPair key_;
  mutable std::mutex mu_;
  Mempool mempool_;
  std::uint64_t next_batch_index_;
  std::uint64_t next_sequence_;
};

/// Append-only data-availability log.
///
/// File layout: "VDA1", u32 LE version, sequencer public key (32), SHA-256
/// of the preceding 40 bytes; then records of u32 LE length, canonical
/// Batch bytes, SHA-256 of those bytes.
class DaLog {
 public:
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::size_t kHeaderSize = 4 + 4 + 32 + 32;

  /// Creates the file or reopens it for appending. A torn final record is
  /// truncated; any other damage throws kCorrupt.
  static DaLog open_for_append(const std::filesystem::path& path, const PublicKey& key);
  /// Read-only view. Damage is reported lazily by read_batch.
  static DaLog open_readonly(const std::filesystem::path& path);

  DaLog(DaLog&&) noexcept;
  DaLog& operator=(DaLog&&) noexcept;
  ~DaLog();

  /// Appends the next batch; returns its byte offset. Throws kOutOfOrder
  /// unless batch_index equals the current record count.
  std::uint64_t publish(const Batch& batch);
  /// Throws kNotFound past the tail and kCorrupt on checksum or decode
  /// failure.
  Batch read_batch(std::uint64_t index) const;
  Bytes read_record(std::uint64_t index) const;
  /// Picks up records appended by another process.
  void refresh();

  std::uint64_t size() const { return offsets_.size(); }
  const PublicKey& sequencer_key() const { return key_; }
  const std::filesystem::path& path() const { return path_; }
  /// Index of the first unreadable record found while scanning, if any.
  std::optional<std::uint64_t> damaged_at() const { return damaged_at_; }

 private:
  DaLog() = default;
  void scan(bool repair);

  std::filesystem::path path_;
  PublicKey key_{};
  std::vector<std::uint64_t> offsets_;
  std::uint64_t end_ = 0;
  std::optional<std::uint64_t> damaged_at_;
  bool writable_ = false;
  mutable std::mutex mu_;
};

}  // namespace vapp
