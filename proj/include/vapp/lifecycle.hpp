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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vapp/authenticated_store.hpp"
#include "vapp/domain.hpp"

namespace vapp {

enum class RejectReason : std::uint8_t {
  kBadFormat = 1,
  kBadSignature = 2,
  kBadNonce = 3,
  kSenderMismatch = 4,
  kInsufficientFunds = 5,
  kOverflow = 6,
};

const char* reject_reason_name(RejectReason reason);
std::optional<RejectReason> reject_reason_from_name(std::string_view name);

struct TxStatus {
  std::optional<RejectReason> rejected;

  static TxStatus success() { return {}; }
  static TxStatus reject(RejectReason r) { return TxStatus{r}; }
  bool ok() const { return !rejected.has_value(); }

  friend bool operator==(const TxStatus&, const TxStatus&) = default;
};

void encode(Encoder& enc, const TxStatus& status);
TxStatus decode_tx_status(Decoder& dec);

/// First access to `key` within one transaction, proven against the
/// transaction's pre-state root.
struct WitnessedRead {
  Bytes key;
  std::optional<Bytes> value;
  MerkleProof proof;
  StateRoot pre_root;

  friend bool operator==(const WitnessedRead&, const WitnessedRead&) = default;
};

/// Final value of a key written by one transaction, proven against the
/// transaction's post-state root. An absent value is a deletion.
struct WitnessedWrite {
  Bytes key;
  std::optional<Bytes> new_value;
  StateRoot post_root;
  MerkleProof proof_of_new;

  friend bool operator==(const WitnessedWrite&, const WitnessedWrite&) = default;
};

void encode(Encoder& enc, const WitnessedRead& r);
void encode(Encoder& enc, const WitnessedWrite& w);
WitnessedRead decode_witnessed_read(Decoder& dec);
WitnessedWrite decode_witnessed_write(Decoder& dec);

/// Handler-facing state access. Tracks first-access reads and buffered
/// writes in program order; later reads see earlier writes of the same
/// transaction. Subclasses decide where first reads come from.
class TrackedState {
 public:
  virtual ~TrackedState() = default;

  std::optional<Bytes> get(ByteView key);
  /// nullopt deletes. Writing a key never read first still witnesses its
  /// prior value so the post-state root can be recomputed from proofs.
  void set(ByteView key, std::optional<Bytes> value);
  /// Drops buffered writes; recorded reads stay.
  void discard_writes();

  const std::vector<Bytes>& read_order() const { return read_order_; }
  /// Final value per written key, in order of first write.
  std::vector<std::pair<Bytes, std::optional<Bytes>>> final_writes() const;

 protected:
  virtual std::optional<Bytes> fetch(ByteView key) = 0;

 private:
  std::map<Bytes, std::optional<Bytes>> cache_;
  std::map<Bytes, std::optional<Bytes>> overlay_;
  std::vector<Bytes> read_order_;
  std::vector<Bytes> write_order_;
};

/// The State() intermediary over a live store. Every first read records an
/// inclusion or exclusion proof against the store root at that moment;
/// writes are buffered until the engine commits them.
class StateView : public TrackedState {
 public:
  explicit StateView(const AuthenticatedStore& store) : store_(store) {}
  const std::vector<WitnessedRead>& recorded_reads() const { return reads_; }

 protected:
  std::optional<Bytes> fetch(ByteView key) override;

 private:
  const AuthenticatedStore& store_;
  std::vector<WitnessedRead> reads_;
};

Balance read_balance(TrackedState& state, const Address& a);
/// A zero balance is stored as an absent key.
void write_balance(TrackedState& state, const Address& a, Balance b);
std::uint64_t read_nonce(TrackedState& state, const Address& a);

struct ExecContext {
  /// Genesis funding is accepted only as transaction 0 over the empty root.
  bool genesis_allowed = false;
};

struct TxOutcome {
  TxStatus status;
  std::vector<TransferEvent> events;
};

/// S0: format, signature, nonce, sender binding, in that order.
std::optional<RejectReason> preprocess(const TransactionEnvelope& env, TrackedState& state,
                                       const ExecContext& ctx);

/// S1-S4 of the VRC20 transfer handler. On rejection nothing is written.
TxOutcome handle_transfer(const TransferTx& tx, TrackedState& state);

/// Full S0-S4 over any TrackedState. Shared by the executor and by
/// stateless re-execution. On success the sender nonce is incremented;
/// rejected transactions leave no buffered writes.
TxOutcome execute_transaction(const TransactionEnvelope& env, TrackedState& state,
                              const ExecContext& ctx);

struct Receipt {
  Digest envelope_digest;
  TxStatus status;
  std::vector<TransferEvent> events;
  StateRoot pre_root;
  StateRoot post_root;

  friend bool operator==(const Receipt&, const Receipt&) = default;
};

struct WitnessFragment {
  std::vector<WitnessedRead> reads;
  std::vector<WitnessedWrite> writes;
};

struct AppliedTransaction {
  Receipt receipt;
  WitnessFragment witness;
};

/// Applies one envelope to the store under a checkpoint. Rejected
/// transactions are rolled back (post_root == pre_root). Store failures
/// propagate after rollback.
AppliedTransaction apply_transaction(const TransactionEnvelope& env, AuthenticatedStore& store,
                                     const ExecContext& ctx);

struct ReceiptRecord {
  std::uint64_t batch_index = 0;
  std::uint32_t tx_index = 0;
  Receipt receipt;

  friend bool operator==(const ReceiptRecord&, const ReceiptRecord&) = default;
};

/// One JSON object per line, fixed field order.
std::string receipt_to_line(const ReceiptRecord& record);
ReceiptRecord receipt_from_line(std::string_view line);

}  // namespace vapp
