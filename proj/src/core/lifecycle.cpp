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

#include "vapp/lifecycle.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"
#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr std::uint8_t kMaxReason = static_cast<std::uint8_t>(RejectReason::kOverflow);

TxOutcome rejected(RejectReason reason) { return TxOutcome{TxStatus::reject(reason), {}}; }

}  // namespace

const char* reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kBadFormat: return "BadFormat";
    case RejectReason::kBadSignature: return "BadSignature";
    case RejectReason::kBadNonce: return "BadNonce";
    case RejectReason::kSenderMismatch: return "SenderMismatch";
    case RejectReason::kInsufficientFunds: return "ErrInsufficientFunds";
    case RejectReason::kOverflow: return "ErrOverflow";
  }
  return "Unknown";
}

std::optional<RejectReason> reject_reason_from_name(std::string_view name) {
  for (std::uint8_t code = 1; code <= kMaxReason; ++code) {
    auto r = static_cast<RejectReason>(code);
    if (name == reject_reason_name(r)) return r;
  }
  return std::nullopt;
}

void encode(Encoder& enc, const TxStatus& status) {
  enc.u8(status.rejected ? static_cast<std::uint8_t>(*status.rejected) : 0);
}

TxStatus decode_tx_status(Decoder& dec) {
  auto code = dec.u8();
  if (code == 0) return TxStatus::success();
  if (code > kMaxReason) throw Error(ErrorCode::kMalformed, "unknown status code");
  return TxStatus::reject(static_cast<RejectReason>(code));
}

void encode(Encoder& enc, const WitnessedRead& r) {
  enc.var_bytes(r.key);
  enc.opt_bytes(r.value);
  encode(enc, r.proof);
  enc.digest(r.pre_root);
}

void encode(Encoder& enc, const WitnessedWrite& w) {
  enc.var_bytes(w.key);
  enc.opt_bytes(w.new_value);
  enc.digest(w.post_root);
  encode(enc, w.proof_of_new);
}

WitnessedRead decode_witnessed_read(Decoder& dec) {
  WitnessedRead r;
  r.key = dec.var_bytes();
  r.value = dec.opt_bytes();
  r.proof = decode_merkle_proof(dec);
  r.pre_root = dec.digest();
  return r;
}

WitnessedWrite decode_witnessed_write(Decoder& dec) {
  WitnessedWrite w;
  w.key = dec.var_bytes();
  w.new_value = dec.opt_bytes();
  w.post_root = dec.digest();
  w.proof_of_new = decode_merkle_proof(dec);
  return w;
}

std::optional<Bytes> TrackedState::get(ByteView key) {
  Bytes k(key.begin(), key.end());
  if (auto it = overlay_.find(k); it != overlay_.end()) return it->second;
  if (auto it = cache_.find(k); it != cache_.end()) return it->second;
  auto value = fetch(key);
  read_order_.push_back(k);
  cache_.emplace(std::move(k), value);
  return value;
}

void TrackedState::set(ByteView key, std::optional<Bytes> value) {
  if (value && value->empty()) throw Error(ErrorCode::kInvalidArgument, "empty value");
  Bytes k(key.begin(), key.end());
  if (!cache_.contains(k)) {
    auto prior = fetch(key);
    read_order_.push_back(k);
    cache_.emplace(k, std::move(prior));
  }
  auto [it, inserted] = overlay_.insert_or_assign(k, std::move(value));
  if (inserted) write_order_.push_back(std::move(k));
}

void TrackedState::discard_writes() {
  overlay_.clear();
  write_order_.clear();
}

std::vector<std::pair<Bytes, std::optional<Bytes>>> TrackedState::final_writes() const {
  std::vector<std::pair<Bytes, std::optional<Bytes>>> out;
  out.reserve(write_order_.size());
  for (const auto& k : write_order_) out.emplace_back(k, overlay_.at(k));
  return out;
}

std::optional<Bytes> StateView::fetch(ByteView key) {
  auto [value, proof] = store_.get_with_proof(key);
  reads_.push_back(WitnessedRead{Bytes(key.begin(), key.end()), value, std::move(proof),
                                 store_.root()});
  return value;
}

Balance read_balance(TrackedState& state, const Address& a) {
  auto raw = state.get(balance_key(a));
  if (!raw) return Balance{};
  auto b = decode_balance_value(*raw);
  if (!b) throw Error(ErrorCode::kCorrupt, "malformed balance value for " + a.hex());
  return *b;
}

void write_balance(TrackedState& state, const Address& a, Balance b) {
  if (b.amount == 0) {
    state.set(balance_key(a), std::nullopt);
  } else {
    state.set(balance_key(a), encode_balance_value(b));
  }
}

std::uint64_t read_nonce(TrackedState& state, const Address& a) {
  auto raw = state.get(nonce_key(a));
  if (!raw) return 0;
  auto n = decode_nonce_value(*raw);
  if (!n) throw Error(ErrorCode::kCorrupt, "malformed nonce value for " + a.hex());
  return *n;
}

std::optional<RejectReason> preprocess(const TransactionEnvelope& env, TrackedState& state,
                                       const ExecContext& ctx) {
  switch (static_cast<TxKind>(env.tx_kind)) {
    case TxKind::kGenesis:
      if (!parse_genesis_payload(env.payload)) return RejectReason::kBadFormat;
      if (!ctx.genesis_allowed) return RejectReason::kBadSignature;
      return std::nullopt;
    case TxKind::kTransfer: {
      auto tx = parse_transfer_payload(env.payload);
      if (!tx) return RejectReason::kBadFormat;
      if (!verify_envelope_signature(env)) return RejectReason::kBadSignature;
      const Address signer = env.sender();
      auto stored = read_nonce(state, signer);
      if (stored != env.nonce || stored == std::numeric_limits<std::uint64_t>::max()) {
        return RejectReason::kBadNonce;
      }
      if (tx->from != signer) return RejectReason::kSenderMismatch;
      return std::nullopt;
    }
  }
  return RejectReason::kBadFormat;
}

TxOutcome handle_transfer(const TransferTx& tx, TrackedState& state) {
  // S1
  const Balance from_balance = read_balance(state, tx.from);
  const Balance to_balance = read_balance(state, tx.to);

  // S2
  if (tx.amt > from_balance) return rejected(RejectReason::kInsufficientFunds);
  if (!to_balance.checked_add(tx.amt)) return rejected(RejectReason::kOverflow);

  // S3. The credit re-reads `to` so that a self-transfer sees its own debit.
  write_balance(state, tx.from, *from_balance.checked_sub(tx.amt));
  auto credited = read_balance(state, tx.to).checked_add(tx.amt);
  if (!credited) {
    state.discard_writes();
    return rejected(RejectReason::kOverflow);
  }
  write_balance(state, tx.to, *credited);

  // S4
  return TxOutcome{TxStatus::success(), {TransferEvent{tx.from, tx.to, tx.amt}}};
}

TxOutcome execute_transaction(const TransactionEnvelope& env, TrackedState& state,
                              const ExecContext& ctx) {
  if (auto reason = preprocess(env, state, ctx)) return rejected(*reason);

  if (static_cast<TxKind>(env.tx_kind) == TxKind::kGenesis) {
    auto genesis = *parse_genesis_payload(env.payload);
    for (const auto& grant : genesis.grants) {
      auto next = read_balance(state, grant.to).checked_add(grant.amount);
      if (!next) {
        state.discard_writes();
        return rejected(RejectReason::kOverflow);
      }
      write_balance(state, grant.to, *next);
    }
    return TxOutcome{TxStatus::success(), {}};
  }

  auto tx = *parse_transfer_payload(env.payload);
  auto outcome = handle_transfer(tx, state);
  if (!outcome.status.ok()) {
    state.discard_writes();
    return outcome;
  }
  const Address signer = env.sender();
  state.set(nonce_key(signer), encode_nonce_value(read_nonce(state, signer) + 1));
  return outcome;
}

AppliedTransaction apply_transaction(const TransactionEnvelope& env, AuthenticatedStore& store,
                                     const ExecContext& ctx) {
  AppliedTransaction result;
  result.receipt.envelope_digest = envelope_digest(env);
  result.receipt.pre_root = store.root();

  auto cp = store.checkpoint();
  try {
    StateView view(store);
    auto outcome = execute_transaction(env, view, ctx);
    result.receipt.status = outcome.status;
    result.receipt.events = std::move(outcome.events);
    result.witness.reads = view.recorded_reads();

    if (!outcome.status.ok()) {
      store.rollback(cp);
      result.receipt.post_root = result.receipt.pre_root;
      return result;
    }

    auto writes = view.final_writes();
    for (const auto& [key, value] : writes) {
      if (value) {
        store.put(key, *value);
      } else {
        store.erase(key);
      }
    }
    const StateRoot post = store.root();
    for (auto& [key, value] : writes) {
      auto [stored, proof] = store.get_with_proof(key);
      result.witness.writes.push_back(WitnessedWrite{key, std::move(value), post, std::move(proof)});
    }
    store.release(cp);
    result.receipt.post_root = post;
    return result;
  } catch (...) {
    store.rollback(cp);
    throw;
  }
}

std::string receipt_to_line(const ReceiptRecord& record) {
  const Receipt& r = record.receipt;
  nlohmann::ordered_json j;
  j["batch"] = record.batch_index;
  j["tx"] = record.tx_index;
  j["envelope_digest"] = r.envelope_digest.hex();
  j["status"] = r.status.ok() ? "Success" : "Rejected";
  j["reason"] = r.status.ok() ? "" : reject_reason_name(*r.status.rejected);
  j["pre_root"] = r.pre_root.hex();
  j["post_root"] = r.post_root.hex();
  auto events = nlohmann::ordered_json::array();
  for (const auto& ev : r.events) {
    nlohmann::ordered_json e;
    e["kind"] = "Transfer";
    e["from"] = ev.from.hex();
    e["to"] = ev.to.hex();
    e["amt"] = ev.amt.to_string();
    events.push_back(std::move(e));
  }
  j["events"] = std::move(events);
  return j.dump();
}

ReceiptRecord receipt_from_line(std::string_view line) {
  try {
    auto j = nlohmann::json::parse(line);
    ReceiptRecord rec;
    rec.batch_index = j.at("batch").get<std::uint64_t>();
    rec.tx_index = j.at("tx").get<std::uint32_t>();
    rec.receipt.envelope_digest = Digest::from_hex(j.at("envelope_digest").get<std::string>());
    if (j.at("status").get<std::string>() != "Success") {
      auto reason = reject_reason_from_name(j.at("reason").get<std::string>());
      if (!reason) throw Error(ErrorCode::kMalformed, "unknown reject reason");
      rec.receipt.status = TxStatus::reject(*reason);
    }
    rec.receipt.pre_root = Digest::from_hex(j.at("pre_root").get<std::string>());
    rec.receipt.post_root = Digest::from_hex(j.at("post_root").get<std::string>());
    for (const auto& e : j.at("events")) {
      if (e.at("kind").get<std::string>() != "Transfer") {
        throw Error(ErrorCode::kMalformed, "unknown event kind");
      }
      rec.receipt.events.push_back(TransferEvent{
          Address::from_hex(e.at("from").get<std::string>()),
          Address::from_hex(e.at("to").get<std::string>()),
          Balance::parse(e.at("amt").get<std::string>())});
    }
    return rec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("receipt line: ") + e.what());
  }
}

}  // namespace vapp
