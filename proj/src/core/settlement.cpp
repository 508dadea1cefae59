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

#include "vapp/settlement.hpp"

#include <map>
#include <set>

#include "json.hpp"
#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr int kMaxAggregationDepth = 16;

struct MissingWitness {};

/// Serves first reads only from a step's witnessed reads.
class WitnessState : public TrackedState {
 public:
  explicit WitnessState(const std::map<Bytes, const WitnessedRead*>& reads) : reads_(reads) {}

 protected:
  std::optional<Bytes> fetch(ByteView key) override {
    auto it = reads_.find(Bytes(key.begin(), key.end()));
    if (it == reads_.end()) throw MissingWitness{};
    return it->second->value;
  }

 private:
  const std::map<Bytes, const WitnessedRead*>& reads_;
};

VerifyResult fail(VerifyReason reason, std::optional<std::uint32_t> step = std::nullopt) {
  return VerifyResult{reason, false, step};
}

VerifyResult verify_at_depth(const StateRoot& post_root, const StateRoot& pre_root,
                             const BatchCommitment& commitment, const Proof& proof, int depth);

VerifyResult verify_replay(const StateRoot& post_root, const StateRoot& pre_root,
                           const BatchCommitment& commitment, const Proof& proof) {
  ExecutionLog log;
  try {
    log = decode_execution_log(proof.body);
  } catch (const Error&) {
    return fail(VerifyReason::kMalformedProof);
  }
  if (compute_log_digest(log) != log.log_digest) return fail(VerifyReason::kLogDigestMismatch);
  if (log.header.pre_root != pre_root || log.header.commitment != commitment ||
      log.final_root != post_root) {
    return fail(VerifyReason::kTripleMismatch);
  }
  if (log.steps.empty() || log.header.tx_count != commitment.tx_count ||
      log.steps.size() != log.header.tx_count) {
    return fail(VerifyReason::kMalformedProof);
  }

  std::vector<Digest> digests;
  digests.reserve(log.steps.size());
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    if (log.steps[i].tx_index != i) return fail(VerifyReason::kMalformedProof);
    digests.push_back(envelope_digest(log.steps[i].envelope));
  }
  if (batch_commitment(digests) != commitment) return fail(VerifyReason::kCommitmentMismatch);

  StateRoot prior = pre_root;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    ExecContext ctx{i == 0 && prior == empty_root()};
    auto replay = replay_step(log.steps[i], prior, ctx);
    if (replay.reason != VerifyReason::kOk) {
      return fail(replay.reason, static_cast<std::uint32_t>(i));
    }
    prior = replay.computed_root;
  }
  if (prior != post_root) return fail(VerifyReason::kRootMismatch);
  return VerifyResult{};
}

VerifyResult verify_aggregated(const StateRoot& post_root, const StateRoot& pre_root,
                               const BatchCommitment& commitment, const Proof& proof,
                               int depth) {
  if (depth >= kMaxAggregationDepth) return fail(VerifyReason::kMalformedProof);
  std::vector<Proof> inner;
  try {
    inner = decode_aggregated_body(proof.body);
  } catch (const Error&) {
    return fail(VerifyReason::kMalformedProof);
  }
  if (inner.empty()) return fail(VerifyReason::kMalformedProof);
  if (inner.front().claimed.pre_root != pre_root || inner.back().claimed.post_root != post_root) {
    return fail(VerifyReason::kTripleMismatch);
  }
  std::vector<Digest> inner_commitments;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i].kind == ProofKind::kOptimisticClaim) return fail(VerifyReason::kUnsupportedProof);
    if (i > 0 && inner[i].claimed.pre_root != inner[i - 1].claimed.post_root) {
      return fail(VerifyReason::kChainMismatch, static_cast<std::uint32_t>(i));
    }
    inner_commitments.push_back(inner[i].claimed.commitment.digest);
  }
  if (batch_commitment(inner_commitments) != commitment) {
    return fail(VerifyReason::kCommitmentMismatch);
  }
  for (std::size_t i = 0; i < inner.size(); ++i) {
    const auto& c = inner[i].claimed;
    auto r = verify_at_depth(c.post_root, c.pre_root, c.commitment, inner[i], depth + 1);
    if (!r.accepted()) return fail(r.reason, static_cast<std::uint32_t>(i));
  }
  return VerifyResult{};
}

VerifyResult verify_at_depth(const StateRoot& post_root, const StateRoot& pre_root,
                             const BatchCommitment& commitment, const Proof& proof, int depth) {
  if (proof.claimed != ClaimedTransition{pre_root, post_root, commitment}) {
    return fail(VerifyReason::kTripleMismatch);
  }
  switch (proof.kind) {
    case ProofKind::kReplay:
      return verify_replay(post_root, pre_root, commitment, proof);
    case ProofKind::kAggregated:
      return verify_aggregated(post_root, pre_root, commitment, proof, depth);
    case ProofKind::kOptimisticClaim: {
      std::vector<StateRoot> roots;
      try {
        roots = decode_claim_roots(proof.body);
      } catch (const Error&) {
        return fail(VerifyReason::kMalformedProof);
      }
      if (roots.empty() || roots.size() != commitment.tx_count || roots.back() != post_root) {
        return fail(VerifyReason::kMalformedProof);
      }
      return VerifyResult{VerifyReason::kOk, true, std::nullopt};
    }
  }
  return fail(VerifyReason::kUnsupportedProof);
}

std::string mode_name(SettlementMode mode) {
  return mode == SettlementMode::kValidity ? "validity" : "optimistic";
}

SettlementMode mode_from_name(const std::string& name) {
  if (name == "validity") return SettlementMode::kValidity;
  if (name == "optimistic") return SettlementMode::kOptimistic;
  throw Error(ErrorCode::kMalformed, "unknown settlement mode " + name);
}

nlohmann::ordered_json transition_json(const FinalizedTransition& t) {
  nlohmann::ordered_json j;
  j["S"] = t.pre_root.hex();
  j["S_prime"] = t.post_root.hex();
  j["C"] = t.commitment.digest.hex();
  j["tx_count"] = t.commitment.tx_count;
  j["mode"] = mode_name(t.mode);
  j["tick"] = t.tick;
  return j;
}

FinalizedTransition transition_from_json(const nlohmann::json& j) {
  FinalizedTransition t;
  t.pre_root = Digest::from_hex(j.at("S").get<std::string>());
  t.post_root = Digest::from_hex(j.at("S_prime").get<std::string>());
  t.commitment.digest = Digest::from_hex(j.at("C").get<std::string>());
  t.commitment.tx_count = j.at("tx_count").get<std::uint32_t>();
  t.mode = mode_from_name(j.at("mode").get<std::string>());
  t.tick = j.at("tick").get<std::uint64_t>();
  return t;
}

}  // namespace

const char* verify_reason_name(VerifyReason reason) {
  switch (reason) {
    case VerifyReason::kOk: return "Ok";
    case VerifyReason::kTripleMismatch: return "TripleMismatch";
    case VerifyReason::kMalformedProof: return "MalformedProof";
    case VerifyReason::kLogDigestMismatch: return "LogDigestMismatch";
    case VerifyReason::kCommitmentMismatch: return "CommitmentMismatch";
    case VerifyReason::kBadWitness: return "BadWitness";
    case VerifyReason::kExecutionMismatch: return "ExecutionMismatch";
    case VerifyReason::kRootMismatch: return "RootMismatch";
    case VerifyReason::kChainMismatch: return "ChainMismatch";
    case VerifyReason::kUnsupportedProof: return "UnsupportedProof";
  }
  return "Unknown";
}

const char* settlement_reason_name(SettlementReason reason) {
  switch (reason) {
    case SettlementReason::kAccepted: return "Accepted";
    case SettlementReason::kStaleBase: return "StaleBase";
    case SettlementReason::kInvalidProof: return "InvalidProof";
    case SettlementReason::kNotValidityProof: return "NotValidityProof";
    case SettlementReason::kClaimPending: return "ClaimPending";
    case SettlementReason::kMalformedClaim: return "MalformedClaim";
  }
  return "Unknown";
}

const char* fraud_verdict_name(FraudVerdict verdict) {
  switch (verdict) {
    case FraudVerdict::kReverted: return "Reverted";
    case FraudVerdict::kUnknownClaim: return "UnknownClaim";
    case FraudVerdict::kNotPending: return "NotPending";
    case FraudVerdict::kWindowClosed: return "WindowClosed";
    case FraudVerdict::kMalformed: return "Malformed";
    case FraudVerdict::kBadWitness: return "BadWitness";
    case FraudVerdict::kNoFraud: return "NoFraud";
  }
  return "Unknown";
}

VerifyResult verify(const StateRoot& post_root, const StateRoot& pre_root,
                    const BatchCommitment& commitment, const Proof& proof) {
  return verify_at_depth(post_root, pre_root, commitment, proof, 0);
}

StepReplay replay_step(const StepEntry& step, const StateRoot& prior_root,
                       const ExecContext& ctx) {
  StepReplay out;
  std::map<Bytes, const WitnessedRead*> reads;
  for (const auto& r : step.reads) {
    if (r.pre_root != prior_root || !verify_proof(prior_root, r.key, r.value, r.proof)) {
      return {VerifyReason::kBadWitness, {}};
    }
    if (!reads.emplace(r.key, &r).second) return {VerifyReason::kBadWitness, {}};
  }

  WitnessState state(reads);
  TxOutcome outcome;
  try {
    outcome = execute_transaction(step.envelope, state, ctx);
  } catch (const MissingWitness&) {
    return {VerifyReason::kBadWitness, {}};
  } catch (const Error&) {
    return {VerifyReason::kExecutionMismatch, {}};
  }

  if (outcome.status != step.status) return {VerifyReason::kExecutionMismatch, {}};
  // Every witness must have been consumed, in the order it was logged.
  if (state.read_order().size() != step.reads.size()) return {VerifyReason::kExecutionMismatch, {}};
  for (std::size_t i = 0; i < step.reads.size(); ++i) {
    if (state.read_order()[i] != step.reads[i].key) return {VerifyReason::kExecutionMismatch, {}};
  }
  auto writes = state.final_writes();
  if (writes.size() != step.writes.size()) return {VerifyReason::kExecutionMismatch, {}};
  for (std::size_t i = 0; i < writes.size(); ++i) {
    if (writes[i].first != step.writes[i].key || writes[i].second != step.writes[i].new_value) {
      return {VerifyReason::kExecutionMismatch, {}};
    }
  }

  if (writes.empty()) {
    out.computed_root = prior_root;
  } else {
    std::vector<ProvenUpdate> updates;
    updates.reserve(writes.size());
    for (const auto& [key, value] : writes) {
      const MerkleProof& proof = reads.at(key)->proof;
      Digest leaf = value ? leaf_digest(proof.key_digest, value_digest(*value)) : Digest::zero();
      updates.push_back(ProvenUpdate{&proof, leaf});
    }
    out.computed_root = root_after_updates(updates);
  }
  if (out.computed_root != step.intermediate_root) return {VerifyReason::kRootMismatch, {}};
  for (const auto& w : step.writes) {
    if (w.post_root != step.intermediate_root ||
        !verify_proof(w.post_root, w.key, w.new_value, w.proof_of_new)) {
      return {VerifyReason::kBadWitness, {}};
    }
  }
  return out;
}

void encode(Encoder& enc, const FraudProof& fp) {
  enc.u64(fp.claim_id);
  enc.u32(fp.tx_index);
  encode(enc, fp.step);
  enc.u32(static_cast<std::uint32_t>(fp.envelope_path.size()));
  for (const auto& d : fp.envelope_path) enc.digest(d);
  enc.digest(fp.claimed_root);
}

FraudProof decode_fraud_proof(ByteView bytes) {
  Decoder dec(bytes);
  FraudProof fp;
  fp.claim_id = dec.u64();
  fp.tx_index = dec.u32();
  fp.step = decode_step_entry(dec);
  auto n = dec.count(32);
  for (std::uint32_t i = 0; i < n; ++i) fp.envelope_path.push_back(dec.digest());
  fp.claimed_root = dec.digest();
  dec.expect_end();
  return fp;
}

std::string history_to_line(const FinalizedTransition& t) { return transition_json(t).dump(); }

FinalizedTransition history_from_line(std::string_view line) {
  try {
    return transition_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("history line: ") + e.what());
  }
}

SettlementContract::SettlementContract(std::uint64_t challenge_window,
                                       const StateRoot& genesis_root)
    : challenge_window_(challenge_window), canonical_root_(genesis_root) {}

const OptimisticClaim* SettlementContract::pending_claim() const {
  return pending_ ? &claims_[*pending_] : nullptr;
}

const OptimisticClaim* SettlementContract::claim(std::uint64_t id) const {
  return id < claims_.size() ? &claims_[id] : nullptr;
}

void SettlementContract::finalize(const StateRoot& pre, const StateRoot& post,
                                  const BatchCommitment& c, SettlementMode mode) {
  history_.push_back(FinalizedTransition{pre, post, c, mode, clock_});
  canonical_root_ = post;
}

SubmitResult SettlementContract::submit_validity(const StateRoot& post_root,
                                                 const StateRoot& pre_root,
                                                 const BatchCommitment& commitment,
                                                 const Proof& proof) {
  SubmitResult result;
  if (pending_) {
    result.reason = SettlementReason::kClaimPending;
    return result;
  }
  if (pre_root != canonical_root_) {
    result.reason = SettlementReason::kStaleBase;
    return result;
  }
  if (proof.kind == ProofKind::kOptimisticClaim) {
    result.reason = SettlementReason::kNotValidityProof;
    return result;
  }
  result.verification = verify(post_root, pre_root, commitment, proof);
  if (!result.verification.accepted()) {
    result.reason = SettlementReason::kInvalidProof;
    return result;
  }
  finalize(pre_root, post_root, commitment, SettlementMode::kValidity);
  return result;
}

SubmitResult SettlementContract::submit_optimistic_claim(const StateRoot& post_root,
                                                         const StateRoot& pre_root,
                                                         const BatchCommitment& commitment,
                                                         std::vector<StateRoot> intermediate_roots) {
  SubmitResult result;
  if (pending_) {
    result.reason = SettlementReason::kClaimPending;
    return result;
  }
  if (pre_root != canonical_root_) {
    result.reason = SettlementReason::kStaleBase;
    return result;
  }
  if (intermediate_roots.empty() || intermediate_roots.size() != commitment.tx_count ||
      intermediate_roots.back() != post_root) {
    result.reason = SettlementReason::kMalformedClaim;
    return result;
  }
  OptimisticClaim claim;
  claim.id = claims_.size();
  claim.pre_root = pre_root;
  claim.post_root = post_root;
  claim.commitment = commitment;
  claim.intermediate_roots = std::move(intermediate_roots);
  claim.submitted_at = clock_;
  result.claim_id = claim.id;
  claims_.push_back(std::move(claim));
  pending_ = claims_.size() - 1;
  return result;
}

void SettlementContract::tick(std::uint64_t n) { clock_ += n; }

std::vector<OptimisticClaim> SettlementContract::finalize_ready() {
  std::vector<OptimisticClaim> done;
  if (!pending_) return done;
  auto& claim = claims_[*pending_];
  if (clock_ < claim.submitted_at + challenge_window_) return done;
  claim.status = ClaimStatus::kFinalized;
  finalize(claim.pre_root, claim.post_root, claim.commitment, SettlementMode::kOptimistic);
  pending_.reset();
  done.push_back(claim);
  return done;
}

FraudVerdict SettlementContract::submit_fraud_proof(const FraudProof& proof) {
  if (proof.claim_id >= claims_.size()) return FraudVerdict::kUnknownClaim;
  auto& claim = claims_[proof.claim_id];
  if (claim.status == ClaimStatus::kFinalized) return FraudVerdict::kWindowClosed;
  if (claim.status != ClaimStatus::kPending) return FraudVerdict::kNotPending;
  if (clock_ >= claim.submitted_at + challenge_window_) return FraudVerdict::kWindowClosed;

  const auto i = proof.tx_index;
  if (i >= claim.intermediate_roots.size() || proof.step.tx_index != i ||
      proof.claimed_root != claim.intermediate_roots[i]) {
    return FraudVerdict::kMalformed;
  }
  if (!verify_batch_inclusion(claim.commitment, envelope_digest(proof.step.envelope), i,
                              proof.envelope_path)) {
    return FraudVerdict::kBadWitness;
  }
  const StateRoot& agreed = i == 0 ? claim.pre_root : claim.intermediate_roots[i - 1];
  auto replay = replay_step(proof.step, agreed, ExecContext{i == 0 && agreed == empty_root()});
  if (replay.reason != VerifyReason::kOk) return FraudVerdict::kBadWitness;
  if (replay.computed_root == claim.intermediate_roots[i]) return FraudVerdict::kNoFraud;

  claim.status = ClaimStatus::kReverted;
  pending_.reset();
  return FraudVerdict::kReverted;
}

std::string SettlementContract::to_json() const {
  nlohmann::ordered_json j;
  j["challenge_window"] = challenge_window_;
  j["canonical_root"] = canonical_root_.hex();
  j["clock"] = clock_;
  auto history = nlohmann::ordered_json::array();
  for (const auto& t : history_) history.push_back(transition_json(t));
  j["history"] = std::move(history);
  auto claims = nlohmann::ordered_json::array();
  for (const auto& c : claims_) {
    nlohmann::ordered_json cj;
    cj["id"] = c.id;
    cj["S"] = c.pre_root.hex();
    cj["S_prime"] = c.post_root.hex();
    cj["C"] = c.commitment.digest.hex();
    cj["tx_count"] = c.commitment.tx_count;
    auto roots = nlohmann::ordered_json::array();
    for (const auto& r : c.intermediate_roots) roots.push_back(r.hex());
    cj["intermediate_roots"] = std::move(roots);
    cj["submitted_at"] = c.submitted_at;
    cj["status"] = static_cast<int>(c.status);
    claims.push_back(std::move(cj));
  }
  j["claims"] = std::move(claims);
  return j.dump(2);
}

SettlementContract SettlementContract::from_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    SettlementContract s(j.at("challenge_window").get<std::uint64_t>(),
                         Digest::from_hex(j.at("canonical_root").get<std::string>()));
    s.clock_ = j.at("clock").get<std::uint64_t>();
    for (const auto& t : j.at("history")) s.history_.push_back(transition_from_json(t));
    for (const auto& cj : j.at("claims")) {
      OptimisticClaim c;
      c.id = cj.at("id").get<std::uint64_t>();
      c.pre_root = Digest::from_hex(cj.at("S").get<std::string>());
      c.post_root = Digest::from_hex(cj.at("S_prime").get<std::string>());
      c.commitment.digest = Digest::from_hex(cj.at("C").get<std::string>());
      c.commitment.tx_count = cj.at("tx_count").get<std::uint32_t>();
      for (const auto& r : cj.at("intermediate_roots")) {
        c.intermediate_roots.push_back(Digest::from_hex(r.get<std::string>()));
      }
      c.submitted_at = cj.at("submitted_at").get<std::uint64_t>();
      auto status = cj.at("status").get<int>();
      if (status < 0 || status > 2) throw Error(ErrorCode::kMalformed, "bad claim status");
      c.status = static_cast<ClaimStatus>(status);
      if (c.id != s.claims_.size()) throw Error(ErrorCode::kMalformed, "claim ids out of order");
      if (c.status == ClaimStatus::kPending) {
        if (s.pending_) throw Error(ErrorCode::kMalformed, "more than one pending claim");
        s.pending_ = s.claims_.size();
      }
      s.claims_.push_back(std::move(c));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformed, std::string("settlement state: ") + e.what());
  }
}

}  // namespace vapp
