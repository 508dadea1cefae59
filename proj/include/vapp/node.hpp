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
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vapp/batch_engine.hpp"
#include "vapp/prover.hpp"
#include "vapp/sequencer.hpp"
#include "vapp/settlement.hpp"

namespace vapp {

enum class ProofMode : std::uint8_t { kReplay = 0, kOptimistic = 1 };

const char* proof_mode_name(ProofMode mode);
std::optional<ProofMode> proof_mode_from_name(std::string_view name);

struct NodeConfig {
  static constexpr const char* kDataDirEnv = "VAPP_DATA_DIR";

  std::filesystem::path data_dir = "vapp-data";
  ProofMode mode = ProofMode::kReplay;
  std::uint64_t challenge_window = SettlementContract::kDefaultChallengeWindow;
  std::size_t max_batch_size = 64;
  /// Hex-encoded Ed25519 seed. Relative paths resolve against data_dir; a
  /// missing file is generated on first start.
  std::filesystem::path sequencer_key = "sequencer.key";
  /// When false, optimistic claims stay pending after submission so an
  /// external watcher can challenge them.
  bool in_process_watcher = true;
  std::vector<GenesisGrant> genesis;

  std::string to_json() const;
  /// Throws kMalformed.
  static NodeConfig from_json(std::string_view text);
  /// Reads the file, resolves relative paths against its directory, then
  /// applies the data-directory environment override.
  static NodeConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  std::filesystem::path key_path() const;
};

/// Writes a fresh seed as hex. Returns the key pair.
KeyPair write_key_file(const std::filesystem::path& path);
KeyPair read_key_file(const std::filesystem::path& path);

struct EventKey {
  std::uint64_t batch_index = 0;
  std::uint32_t tx_index = 0;
  std::uint32_t ordinal = 0;

  friend bool operator==(const EventKey&, const EventKey&) = default;
  friend auto operator<=>(const EventKey&, const EventKey&) = default;
};

struct EventRecord {
  EventKey key;
  std::string kind;
  TransferEvent event;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

std::string event_to_line(const EventRecord& record);

struct EventFilter {
  /// Matches either side of a transfer.
  std::optional<Address> address;
  std::optional<std::string> kind;
  /// Inclusive bounds.
  std::optional<std::uint64_t> batch_from;
  std::optional<std::uint64_t> batch_to;
};

/// Receipt events keyed by (batch, tx, ordinal) with secondary indexes by
/// address and kind.
class EventIndex {
 public:
  void add(const ReceiptRecord& record);
  /// Ordered by key.
  std::vector<EventRecord> query(const EventFilter& filter) const;
  std::size_t size() const { return events_.size(); }

  static EventIndex rebuild(std::span<const ReceiptRecord> receipts);

 private:
  std::map<EventKey, EventRecord> events_;
  std::map<Address, std::set<EventKey>> by_address_;
  std::map<std::string, std::set<EventKey>> by_kind_;
};

/// Independent DA replayer. Keeps its own store and challenges pending
/// claims that diverge from its re-execution.
class Watcher {
 public:
  explicit Watcher(std::filesystem::path da_path);

  struct SyncReport {
    std::uint64_t replayed = 0;
    /// First record that could not be read or whose declared roots differ
    /// from re-execution; replay stops there.
    std::optional<std::uint64_t> stopped_at;
    std::string error;
  };

  /// Replays DA records not yet seen.
  SyncReport sync();
  /// A fraud proof for the first divergent transaction of the pending
  /// claim, if it disagrees with the replay. At most one per call.
  std::optional<FraudProof> challenge(const SettlementContract& settlement);

  std::uint64_t replayed() const { return batches_.size(); }
  StateRoot root() const { return store_.root(); }

 private:
  struct Replayed {
    StateRoot pre_root;
    BatchCommitment commitment;
    std::vector<StateRoot> roots;
  };

  std::optional<BatchExecution> execution_of(std::uint64_t index);

  std::filesystem::path da_path_;
  std::optional<DaLog> da_;
  AuthenticatedStore store_;
  std::vector<Replayed> batches_;
  std::optional<BatchExecution> latest_;
};

/// Injects a wrong claimed root at `tx_index` (clamped to the batch) and
/// every later one when batch `batch_index` is first claimed.
struct FaultPlan {
  std::uint64_t batch_index = 0;
  std::uint32_t tx_index = 0;
};

struct BatchReport {
  std::uint64_t batch_index = 0;
  std::uint32_t tx_count = 0;
  std::uint32_t rejected = 0;
  StateRoot pre_root;
  StateRoot post_root;
  BatchCommitment commitment;
  ProofMode mode = ProofMode::kReplay;
  bool fault_injected = false;
  std::vector<std::uint32_t> fraud_proofs;
  bool reverted = false;
  bool finalized = false;
};

std::string batch_report_to_line(const BatchReport& report);

/// The orchestrator: sequencer, engine, prover, settlement, watcher and
/// index over one data directory. Public methods are serialized.
class Node {
 public:
  /// Opens or initializes the data directory and recovers state from the
  /// DA log and the settlement record.
  explicit Node(NodeConfig config);

  SubmitOutcome submit(const TransactionEnvelope& env);
  /// Committed nonce plus envelopes from `sender` still in the mempool.
  std::uint64_t next_nonce(const Address& sender) const;

  /// Seals and drives one batch to settlement. Throws kNoWork on an empty
  /// mempool and kSettlementRejected if settlement refuses honest output.
  BatchReport process_batch();
  /// Settles anything outstanding, then processes batches until the
  /// mempool is empty.
  std::vector<BatchReport> run();

  void set_fault_plan(std::optional<FaultPlan> plan) { fault_ = plan; }

  const NodeConfig& config() const { return config_; }
  const SettlementContract& settlement() const { return settlement_; }
  const AuthenticatedStore& store() const { return store_; }
  const EventIndex& index() const { return index_; }
  const std::vector<ReceiptRecord>& receipts() const { return receipts_; }
  const PublicKey& sequencer_key() const { return sequencer_.public_key(); }
  std::uint64_t batch_count() const { return da_.size(); }
  std::size_t mempool_size() const { return sequencer_.pending().size(); }

  std::vector<EventRecord> query(const EventFilter& filter) const;
  Balance balance(const Address& a) const;
  std::uint64_t nonce(const Address& a) const;

  std::filesystem::path da_path() const;
  std::filesystem::path log_path(std::uint64_t batch_index) const;
  std::filesystem::path proof_path(std::uint64_t batch_index) const;

 private:
  void recover();
  void settle_outstanding(BatchReport* report);
  void settle_batch(std::uint64_t index, BatchReport* report);
  void submit_claim(std::uint64_t index, bool allow_fault, BatchReport* report);
  void finish_claim(BatchReport* report);
  void record_batch(const Batch& batch, const BatchExecution& exec);
  void save_settlement() const;
  void save_mempool() const;
  void append_history(const FinalizedTransition& t) const;

  NodeConfig config_;
  mutable std::mutex mu_;
  Sequencer sequencer_;
  DaLog da_;
  AuthenticatedStore store_;
  SettlementContract settlement_;
  Watcher watcher_;
  EventIndex index_;
  std::vector<ReceiptRecord> receipts_;
  /// Executions of published batches not yet finalized, by batch index.
  std::map<std::uint64_t, BatchExecution> unsettled_;
  std::optional<FaultPlan> fault_;
};

}  // namespace vapp
