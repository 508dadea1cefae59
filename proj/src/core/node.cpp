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

#include "vapp/node.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vapp/error.hpp"

namespace vapp {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDaFile = "da.log";
constexpr const char* kSettlementFile = "settlement.json";
constexpr const char* kHistoryFile = "settlement_history.jsonl";
constexpr const char* kReceiptsFile = "receipts.jsonl";
constexpr const char* kMempoolFile = "mempool.bin";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Write to a sibling temp file, then rename over the target.
void write_atomic(const fs::path& path, ByteView bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  write_file_bytes(tmp, bytes);
  fs::rename(tmp, path);
}

void write_atomic(const fs::path& path, std::string_view text) { write_atomic(path, as_bytes(text)); }

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  out << line << '\n';
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path.string());
}

KeyPair load_or_create_key(const NodeConfig& config) {
  fs::create_directories(config.data_dir);
  const fs::path path = config.key_path();
  if (fs::exists(path)) return read_key_file(path);
  return write_key_file(path);
}

SettlementContract load_settlement(const NodeConfig& config) {
  const fs::path path = config.data_dir / kSettlementFile;
  if (!fs::exists(path)) return SettlementContract(config.challenge_window);
  auto s = SettlementContract::from_json(read_text(path));
  if (s.challenge_window() != config.challenge_window) {
    throw Error(ErrorCode::kInvalidArgument, "challenge window differs from the settlement record");
  }
  return s;
}

bool claim_matches(const OptimisticClaim& claim, const BatchExecution& exec) {
  return claim.pre_root == exec.pre_root && claim.commitment == exec.commitment;
}

}  // namespace

const char* proof_mode_name(ProofMode mode) {
  return mode == ProofMode::kReplay ? "replay" : "optimistic";
}

std::optional<ProofMode> proof_mode_from_name(std::string_view name) {
  if (name == "replay") return ProofMode::kReplay;
  if (name == "optimistic") return ProofMode::kOptimistic;
  return std::nullopt;
}

std::string NodeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["data_dir"] = data_dir.string();
  j["mode"] = proof_mode_name(mode);
  j["challenge_window"] = challenge_window;
  j["max_batch_size"] = max_batch_size;
  j["sequencer_key"] = sequencer_key.string();
  j["in_process_watcher"] = in_process_watcher;
  auto grants = nlohmann::ordered_json::array();
  for (const auto& g : genesis) {
    grants.push_back({{"address", g.to.hex()}, {"amount", g.amount.to_string()}});
  }
  j["genesis"] = std::move(grants);
  return j.dump(2) + "\n";
}

NodeConfig NodeConfig::from_json(std::string_view text) {
  NodeConfig c;
  try {
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::kMalformed, "config must be a JSON object");
    if (j.contains("data_dir")) c.data_dir = j["data_dir"].get<std::string>();
    if (j.contains("mode")) {
      auto mode = proof_mode_from_name(j["mode"].get<std::string>());
      if (!mode) throw Error(ErrorCode::kMalformed, "mode must be replay or optimistic");
      c.mode = *mode;
    }
    if (j.contains("challenge_window")) c.challenge_window = j["challenge_window"].get<std::uint64_t>();
    if (j.contains("max_batch_size")) c.max_batch_size = j["max_batch_size"].get<std::size_t>();
    if (j.contains("sequencer_key")) c.sequencer_key = j["sequencer_key"].get<std::string>();
    if (j.contains("in_process_watcher")) c.in_process_watcher = j["in_process_watcher"].get<bool>();
    if (j.contains("genesis")) {
      for (const auto& g : j["genesis"]) {
        GenesisGrant grant;
        grant.to = Address::from_hex(g.at("address").get<std::string>());
        const auto& amount = g.at("amount");
        grant.amount = amount.is_string() ? Balance::parse(amount.get<std::string>())
                                          : Balance{amount.get<std::uint64_t>()};
        c.genesis.push_back(grant);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kMalformed) throw;
    throw Error(ErrorCode::kMalformed, std::string("config: ") + e.what());
  }
  if (c.max_batch_size == 0) throw Error(ErrorCode::kMalformed, "max_batch_size must be positive");
  return c;
}

NodeConfig NodeConfig::load(const fs::path& path) {
  NodeConfig c = from_json(read_text(path));
  if (c.data_dir.is_relative()) c.data_dir = path.parent_path() / c.data_dir;
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
    c.data_dir = env;
  }
  return c;
}

void NodeConfig::save(const fs::path& path) const { write_atomic(path, std::string_view(to_json())); }

fs::path NodeConfig::key_path() const {
  return sequencer_key.is_absolute() ? sequencer_key : data_dir / sequencer_key;
}

KeyPair write_key_file(const fs::path& path) {
  KeyPair key = KeyPair::generate();
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_atomic(path, std::string_view(to_hex(key.seed()) + "\n"));
  fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write);
  return key;
}

KeyPair read_key_file(const fs::path& path) {
  std::string text = read_text(path);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  Bytes seed = from_hex(text);
  if (seed.size() != 32) throw Error(ErrorCode::kMalformed, path.string() + " is not a 32-byte seed");
  std::array<std::uint8_t, 32> s{};
  std::copy(seed.begin(), seed.end(), s.begin());
  return KeyPair::from_seed(s);
}

std::string event_to_line(const EventRecord& r) {
  nlohmann::ordered_json j;
  j["batch"] = r.key.batch_index;
  j["tx"] = r.key.tx_index;
  j["ordinal"] = r.key.ordinal;
  j["kind"] = r.kind;
  j["from"] = r.event.from.hex();
  j["to"] = r.event.to.hex();
  j["amt"] = r.event.amt.to_string();
  return j.dump();
}

void EventIndex::add(const ReceiptRecord& record) {
  for (std::size_t i = 0; i < record.receipt.events.size(); ++i) {
    const auto& ev = record.receipt.events[i];
    EventKey key{record.batch_index, record.tx_index, static_cast<std::uint32_t>(i)};
    events_[key] = EventRecord{key, "Transfer", ev};
    by_address_[ev.from].insert(key);
    by_address_[ev.to].insert(key);
    by_kind_["Transfer"].insert(key);
  }
}

std::vector<EventRecord> EventIndex::query(const EventFilter& filter) const {
  const std::set<EventKey>* candidates = nullptr;
  if (filter.address) {
    auto it = by_address_.find(*filter.address);
    if (it == by_address_.end()) return {};
    candidates = &it->second;
  }
  if (filter.kind) {
    auto it = by_kind_.find(*filter.kind);
    if (it == by_kind_.end()) return {};
    if (candidates == nullptr || it->second.size() < candidates->size()) candidates = &it->second;
  }

  auto in_range = [&](const EventKey& k) {
    return (!filter.batch_from || k.batch_index >= *filter.batch_from) &&
           (!filter.batch_to || k.batch_index <= *filter.batch_to);
  };
  auto matches = [&](const EventRecord& r) {
    return in_range(r.key) && (!filter.kind || r.kind == *filter.kind) &&
           (!filter.address || r.event.from == *filter.address || r.event.to == *filter.address);
  };

  std::vector<EventRecord> out;
  if (candidates != nullptr) {
    for (const auto& key : *candidates) {
      const auto& r = events_.at(key);
      if (matches(r)) out.push_back(r);
    }
    return out;
  }
  auto it = filter.batch_from ? events_.lower_bound(EventKey{*filter.batch_from, 0, 0}) : events_.begin();
  for (; it != events_.end(); ++it) {
    if (filter.batch_to && it->first.batch_index > *filter.batch_to) break;
    if (matches(it->second)) out.push_back(it->second);
  }
  return out;
}

EventIndex EventIndex::rebuild(std::span<const ReceiptRecord> receipts) {
  EventIndex index;
  for (const auto& r : receipts) index.add(r);
  return index;
}

Watcher::Watcher(fs::path da_path) : da_path_(std::move(da_path)) {}

Watcher::SyncReport Watcher::sync() {
  SyncReport report;
  if (!da_) {
    if (!fs::exists(da_path_)) return report;
    da_ = DaLog::open_readonly(da_path_);
  } else {
    da_->refresh();
  }
  for (std::uint64_t i = batches_.size(); i < da_->size(); ++i) {
    Batch b;
    try {
      b = da_->read_batch(i);
    } catch (const Error& e) {
      report.stopped_at = i;
      report.error = e.what();
      return report;
    }
    auto cp = store_.checkpoint();
    std::optional<BatchExecution> exec;
    try {
      exec = apply_batch(b.envelopes, store_);
    } catch (const Error& e) {
      store_.rollback(cp);
      report.stopped_at = i;
      report.error = e.what();
      return report;
    }
    if (exec->pre_root != b.pre_root || exec->post_root != b.post_root ||
        exec->commitment != b.commitment) {
      store_.rollback(cp);
      report.stopped_at = i;
      report.error = "declared roots of batch " + std::to_string(i) + " differ from replay";
      return report;
    }
    store_.release(cp);
    Replayed r{exec->pre_root, exec->commitment, {}};
    for (const auto& receipt : exec->receipts) r.roots.push_back(receipt.post_root);
    batches_.push_back(std::move(r));
    latest_ = std::move(exec);
    ++report.replayed;
  }
  if (auto damaged = da_->damaged_at(); damaged && *damaged == batches_.size()) {
    report.stopped_at = *damaged;
    report.error = "DA record " + std::to_string(*damaged) + " is damaged";
  }
  return report;
}

std::optional<BatchExecution> Watcher::execution_of(std::uint64_t index) {
  if (index + 1 == batches_.size() && latest_) return latest_;
  AuthenticatedStore scratch;
  for (std::uint64_t i = 0; i < index; ++i) apply_batch(da_->read_batch(i).envelopes, scratch);
  return apply_batch(da_->read_batch(index).envelopes, scratch);
}

std::optional<FraudProof> Watcher::challenge(const SettlementContract& settlement) {
  const OptimisticClaim* claim = settlement.pending_claim();
  if (claim == nullptr) return std::nullopt;
  auto it = std::find_if(batches_.rbegin(), batches_.rend(), [&](const Replayed& r) {
    return r.pre_root == claim->pre_root && r.commitment == claim->commitment;
  });
  if (it == batches_.rend()) return std::nullopt;
  const auto& roots = it->roots;
  if (roots.size() != claim->intermediate_roots.size()) return std::nullopt;
  std::size_t i = 0;
  while (i < roots.size() && roots[i] == claim->intermediate_roots[i]) ++i;
  if (i == roots.size()) return std::nullopt;

  const std::uint64_t index = static_cast<std::uint64_t>(std::distance(it, batches_.rend()) - 1);
  auto exec = execution_of(index);
  std::vector<Digest> digests;
  digests.reserve(exec->log.steps.size());
  for (const auto& step : exec->log.steps) digests.push_back(envelope_digest(step.envelope));

  FraudProof fp;
  fp.claim_id = claim->id;
  fp.tx_index = static_cast<std::uint32_t>(i);
  fp.step = exec->log.steps[i];
  fp.envelope_path = batch_inclusion_path(digests, i);
  fp.claimed_root = claim->intermediate_roots[i];
  return fp;
}

std::string batch_report_to_line(const BatchReport& r) {
  nlohmann::ordered_json j;
  j["batch"] = r.batch_index;
  j["tx_count"] = r.tx_count;
  j["rejected"] = r.rejected;
  j["S"] = r.pre_root.hex();
  j["S_prime"] = r.post_root.hex();
  j["C"] = r.commitment.digest.hex();
  j["mode"] = proof_mode_name(r.mode);
  j["fault_injected"] = r.fault_injected;
  j["fraud_proofs"] = r.fraud_proofs;
  j["reverted"] = r.reverted;
  j["finalized"] = r.finalized;
  return j.dump();
}

Node::Node(NodeConfig config)
    : config_(std::move(config)),
      sequencer_(load_or_create_key(config_)),
      da_(DaLog::open_for_append(config_.data_dir / kDaFile, sequencer_.public_key())),
      settlement_(load_settlement(config_)),
      watcher_(config_.data_dir / kDaFile) {
  fs::create_directories(config_.data_dir / "logs");
  fs::create_directories(config_.data_dir / "proofs");
  if (!fs::exists(config_.data_dir / kSettlementFile)) save_settlement();
  recover();
}

fs::path Node::da_path() const { return config_.data_dir / kDaFile; }

fs::path Node::log_path(std::uint64_t batch_index) const {
  return config_.data_dir / "logs" / ("batch-" + std::to_string(batch_index) + ".vlog");
}

fs::path Node::proof_path(std::uint64_t batch_index) const {
  return config_.data_dir / "proofs" / ("batch-" + std::to_string(batch_index) + ".vproof");
}

void Node::recover() {
  const auto& history = settlement_.history();
  if (history.size() > da_.size()) {
    throw Error(ErrorCode::kCorrupt, "settlement history is ahead of the DA log");
  }
  for (std::uint64_t i = 0; i < da_.size(); ++i) {
    Batch b = da_.read_batch(i);
    auto exec = apply_batch(b.envelopes, store_);
    if (exec.pre_root != b.pre_root || exec.post_root != b.post_root ||
        exec.commitment != b.commitment) {
      throw Error(ErrorCode::kCorrupt, "DA batch " + std::to_string(i) + " does not replay");
    }
    if (i < history.size() && (history[i].pre_root != b.pre_root ||
                               history[i].post_root != b.post_root ||
                               history[i].commitment != b.commitment)) {
      throw Error(ErrorCode::kCorrupt,
                  "settlement history diverges from the DA log at batch " + std::to_string(i));
    }
    sequencer_.remember_published(b);
    for (std::uint32_t t = 0; t < exec.receipts.size(); ++t) {
      receipts_.push_back(ReceiptRecord{i, t, exec.receipts[t]});
      index_.add(receipts_.back());
    }
    if (i >= history.size()) unsettled_.emplace(i, std::move(exec));
  }

  std::string lines;
  for (const auto& r : receipts_) lines += receipt_to_line(r) + "\n";
  write_atomic(config_.data_dir / kReceiptsFile, std::string_view(lines));
  lines.clear();
  for (const auto& t : history) lines += history_to_line(t) + "\n";
  write_atomic(config_.data_dir / kHistoryFile, std::string_view(lines));

  const fs::path mempool = config_.data_dir / kMempoolFile;
  if (fs::exists(mempool)) {
    Bytes bytes = read_file_bytes(mempool);
    try {
      Decoder dec(bytes);
      auto n = dec.count(8 + 4);
      for (std::uint32_t i = 0; i < n; ++i) {
        PendingEnvelope p;
        p.sequence = dec.u64();
        Bytes env = dec.var_bytes();
        Decoder env_dec(env);
        p.envelope = decode_envelope(env_dec);
        env_dec.expect_end();
        if (p.sequence >= sequencer_.next_sequence()) sequencer_.restore_pending(p);
      }
      dec.expect_end();
    } catch (const Error& e) {
      throw Error(ErrorCode::kCorrupt, std::string("mempool file: ") + e.what());
    }
  }
  save_mempool();
  watcher_.sync();

  if (da_.size() == 0 && sequencer_.next_sequence() == 0 && !config_.genesis.empty()) {
    sequencer_.submit_genesis(make_genesis(config_.genesis));
    save_mempool();
    const std::size_t saved = config_.max_batch_size;
    config_.max_batch_size = 1;
    try {
      process_batch();
    } catch (...) {
      config_.max_batch_size = saved;
      throw;
    }
    config_.max_batch_size = saved;
  }
}

SubmitOutcome Node::submit(const TransactionEnvelope& env) {
  auto outcome = sequencer_.submit(env);
  if (outcome.admitted()) {
    std::lock_guard lock(mu_);
    save_mempool();
  }
  return outcome;
}

std::uint64_t Node::next_nonce(const Address& sender) const {
  std::lock_guard lock(mu_);
  StateView view(store_);
  return read_nonce(view, sender) + sequencer_.pending_from(sender);
}

Balance Node::balance(const Address& a) const {
  std::lock_guard lock(mu_);
  StateView view(store_);
  return read_balance(view, a);
}

std::uint64_t Node::nonce(const Address& a) const {
  std::lock_guard lock(mu_);
  StateView view(store_);
  return read_nonce(view, a);
}

std::vector<EventRecord> Node::query(const EventFilter& filter) const {
  std::lock_guard lock(mu_);
  return index_.query(filter);
}

void Node::save_settlement() const {
  write_atomic(config_.data_dir / kSettlementFile, std::string_view(settlement_.to_json()));
}

void Node::save_mempool() const {
  auto pending = sequencer_.pending();
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(pending.size()));
  for (const auto& p : pending) {
    enc.u64(p.sequence);
    enc.var_bytes(canonical_encode(p.envelope));
  }
  write_atomic(config_.data_dir / kMempoolFile, ByteView(std::move(enc).take()));
}

void Node::append_history(const FinalizedTransition& t) const {
  append_line(config_.data_dir / kHistoryFile, history_to_line(t));
}

void Node::record_batch(const Batch& batch, const BatchExecution& exec) {
  const fs::path receipts = config_.data_dir / kReceiptsFile;
  std::string lines;
  for (std::uint32_t t = 0; t < exec.receipts.size(); ++t) {
    receipts_.push_back(ReceiptRecord{batch.batch_index, t, exec.receipts[t]});
    index_.add(receipts_.back());
    lines += receipt_to_line(receipts_.back()) + "\n";
  }
  std::ofstream out(receipts, std::ios::app);
  out << lines;
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + receipts.string());
  write_log_file(log_path(batch.batch_index), exec.log);
}

BatchReport Node::process_batch() {
  std::lock_guard lock(mu_);
  settle_outstanding(nullptr);
  if (settlement_.pending_claim() != nullptr) {
    throw Error(ErrorCode::kSettlementRejected, "a claim is still awaiting its challenge window");
  }

  Batch batch = sequencer_.seal_batch(config_.max_batch_size);
  auto exec = apply_batch(batch.envelopes, store_);
  batch.pre_root = exec.pre_root;
  batch.post_root = exec.post_root;
  da_.publish(batch);
  save_mempool();
  record_batch(batch, exec);

  BatchReport report;
  report.batch_index = batch.batch_index;
  report.tx_count = exec.commitment.tx_count;
  report.rejected = static_cast<std::uint32_t>(std::count_if(
      exec.receipts.begin(), exec.receipts.end(), [](const Receipt& r) { return !r.status.ok(); }));
  report.pre_root = exec.pre_root;
  report.post_root = exec.post_root;
  report.commitment = exec.commitment;
  report.mode = config_.mode;
  unsettled_.emplace(batch.batch_index, std::move(exec));
  settle_batch(batch.batch_index, &report);
  return report;
}

std::vector<BatchReport> Node::run() {
  std::vector<BatchReport> reports;
  {
    std::lock_guard lock(mu_);
    settle_outstanding(nullptr);
  }
  while (sequencer_.pending().size() > 0) {
    reports.push_back(process_batch());
    if (!reports.back().finalized) break;
  }
  return reports;
}

void Node::settle_outstanding(BatchReport* report) {
  BatchReport scratch;
  if (report == nullptr) report = &scratch;
  while (!unsettled_.empty()) {
    const std::uint64_t index = unsettled_.begin()->first;
    if (settlement_.pending_claim() == nullptr) {
      settle_batch(index, report);
      if (unsettled_.contains(index)) finish_claim(report);
    } else {
      finish_claim(report);
    }
  }
}

void Node::settle_batch(std::uint64_t index, BatchReport* report) {
  const auto& exec = unsettled_.at(index);
  if (config_.mode == ProofMode::kOptimistic) {
    submit_claim(index, true, report);
    if (config_.in_process_watcher) finish_claim(report);
    return;
  }

  Proof proof = prove_replay(exec.log);
  write_proof_file(proof_path(index), proof);
  auto result = settlement_.submit_validity(exec.post_root, exec.pre_root, exec.commitment, proof);
  if (!result.accepted()) {
    throw Error(ErrorCode::kSettlementRejected,
                "batch " + std::to_string(index) + ": " + settlement_reason_name(result.reason) +
                    " (" + verify_reason_name(result.verification.reason) + ")");
  }
  save_settlement();
  append_history(settlement_.history().back());
  unsettled_.erase(index);
  report->finalized = true;
}

void Node::submit_claim(std::uint64_t index, bool allow_fault, BatchReport* report) {
  const auto& exec = unsettled_.at(index);
  Proof proof = OptimisticBackend{}.prove(exec.log);
  write_proof_file(proof_path(index), proof);
  auto roots = decode_claim_roots(proof.body);
  if (allow_fault && fault_ && fault_->batch_index == index) {
    const std::size_t from = std::min<std::size_t>(fault_->tx_index, roots.size() - 1);
    for (std::size_t j = from; j < roots.size(); ++j) roots[j].bytes[31] ^= 0x5a;
    report->fault_injected = true;
    fault_.reset();
  }
  const StateRoot post = roots.back();
  auto result = settlement_.submit_optimistic_claim(post, exec.pre_root, exec.commitment,
                                                    std::move(roots));
  if (!result.accepted()) {
    throw Error(ErrorCode::kSettlementRejected, "claim for batch " + std::to_string(index) +
                                                    ": " + settlement_reason_name(result.reason));
  }
  save_settlement();
}

void Node::finish_claim(BatchReport* report) {
  const std::uint64_t index = unsettled_.begin()->first;
  const auto& exec = unsettled_.at(index);
  const OptimisticClaim* claim = settlement_.pending_claim();
  if (claim == nullptr || !claim_matches(*claim, exec)) {
    throw Error(ErrorCode::kSettlementRejected,
                "pending claim does not belong to batch " + std::to_string(index));
  }

  if (config_.in_process_watcher) {
    watcher_.sync();
    if (auto fp = watcher_.challenge(settlement_)) {
      auto verdict = settlement_.submit_fraud_proof(*fp);
      report->fraud_proofs.push_back(fp->tx_index);
      save_settlement();
      if (verdict != FraudVerdict::kReverted) {
        throw Error(ErrorCode::kSettlementRejected,
                    std::string("fraud proof refused: ") + fraud_verdict_name(verdict));
      }
      report->reverted = true;
      submit_claim(index, false, report);
      claim = settlement_.pending_claim();
    }
  }

  const std::uint64_t deadline = claim->submitted_at + settlement_.challenge_window();
  if (settlement_.clock() < deadline) settlement_.tick(deadline - settlement_.clock());
  for (const auto& done : settlement_.finalize_ready()) {
    append_history(settlement_.history().back());
    if (done.post_root != exec.post_root) {
      save_settlement();
      throw Error(ErrorCode::kSettlementRejected,
                  "an incorrect claim for batch " + std::to_string(index) + " finalized");
    }
  }
  save_settlement();
  unsettled_.erase(index);
  report->finalized = true;
}

}  // namespace vapp
