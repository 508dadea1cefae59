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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vapp/prover.hpp"

namespace vapp {

enum class VerifyReason : std::uint8_t {
  kOk = 0,
  kTripleMismatch,
  kMalformedProof,
  kLogDigestMismatch,
  kCommitmentMismatch,
  kBadWitness,
  kExecutionMismatch,
  kRootMismatch,
  kChainMismatch,
  kUnsupportedProof,
};

const char* verify_reason_name(VerifyReason reason);

struct VerifyResult {
  VerifyReason reason = VerifyReason::kOk;
  /// Set for optimistic claims, which are accepted only pending challenge.
  bool pending_challenge = false;
  /// Index of the failing step for replay checks, when applicable.
  std::optional<std::uint32_t> step;

  bool accepted() const { return reason == VerifyReason::kOk; }
};

/// Unified stateless verifier for the transition (S, C) -> S'. Depends only
/// on its arguments.
VerifyResult verify(const StateRoot& post_root, const StateRoot& pre_root,
                    const BatchCommitment& commitment, const Proof& proof);

struct StepReplay {
  VerifyReason reason = VerifyReason::kOk;
  StateRoot computed_root;
};

/// Re-executes one logged transaction from its witnesses alone: proofs
/// against `prior_root`, handler re-execution, write-set comparison, and
/// recomputation of the intermediate root from the read proofs.
StepReplay replay_step(const StepEntry& step, const StateRoot& prior_root,
                       const ExecContext& ctx);

enum class SettlementMode : std::uint8_t { kValidity = 0, kOptimistic = 1 };

struct FinalizedTransition {
  StateRoot pre_root;
  StateRoot post_root;
  BatchCommitment commitment;
  SettlementMode mode = SettlementMode::kValidity;
  std::uint64_t tick = 0;

  friend bool operator==(const FinalizedTransition&, const FinalizedTransition&) = default;
};

/// Line-delimited audit record: S, S', C, mode, tick.
std::string history_to_line(const FinalizedTransition& t);
FinalizedTransition history_from_line(std::string_view line);

enum class ClaimStatus : std::uint8_t { kPending = 0, kFinalized = 1, kReverted = 2 };

struct OptimisticClaim {
  std::uint64_t id = 0;
  StateRoot pre_root;
  StateRoot post_root;
  BatchCommitment commitment;
  /// Claimed root after each transaction; the last one is S'.
  std::vector<StateRoot> intermediate_roots;
  std::uint64_t submitted_at = 0;
  ClaimStatus status = ClaimStatus::kPending;
};

/// Evidence that the claim's root after `tx_index` is wrong: the correct
/// step (witnessed against the agreed prior root), the envelope's inclusion
/// path in C, and the claimed root being disputed.
struct FraudProof {
  std::uint64_t claim_id = 0;
  std::uint32_t tx_index = 0;
  StepEntry step;
  std::vector<Digest> envelope_path;
  StateRoot claimed_root;

  friend bool operator==(const FraudProof&, const FraudProof&) = default;
};

void encode(Encoder& enc, const FraudProof& fp);
FraudProof decode_fraud_proof(ByteView bytes);

enum class SettlementReason : std::uint8_t {
  kAccepted = 0,
  kStaleBase,
  kInvalidProof,
  kNotValidityProof,
  kClaimPending,
  kMalformedClaim,
};

const char* settlement_reason_name(SettlementReason reason);

struct SubmitResult {
  SettlementReason reason = SettlementReason::kAccepted;
  VerifyResult verification;
  std::uint64_t claim_id = 0;

  bool accepted() const { return reason == SettlementReason::kAccepted; }
};

enum class FraudVerdict : std::uint8_t {
  kReverted = 0,
  kUnknownClaim,
  kNotPending,
  kWindowClosed,
  kMalformed,
  kBadWitness,
  kNoFraud,
};

const char* fraud_verdict_name(FraudVerdict verdict);

/// Simulated settlement layer. Every mutating call is totally ordered; the
/// logical clock only moves through tick().
class SettlementContract {
 public:
  static constexpr std::uint64_t kDefaultChallengeWindow = 10;

  explicit SettlementContract(std::uint64_t challenge_window = kDefaultChallengeWindow,
                              const StateRoot& genesis_root = empty_root());

  SubmitResult submit_validity(const StateRoot& post_root, const StateRoot& pre_root,
                               const BatchCommitment& commitment, const Proof& proof);

  /// One pending claim at a time; its base must be the canonical root.
  SubmitResult submit_optimistic_claim(const StateRoot& post_root, const StateRoot& pre_root,
                                       const BatchCommitment& commitment,
                                       std::vector<StateRoot> intermediate_roots);

  void tick(std::uint64_t n);
  /// Finalizes the pending claim once clock >= submitted_at + window.
  std::vector<OptimisticClaim> finalize_ready();
  FraudVerdict submit_fraud_proof(const FraudProof& proof);

  const StateRoot& canonical_root() const { return canonical_root_; }
  const std::vector<FinalizedTransition>& history() const { return history_; }
  std::uint64_t clock() const { return clock_; }
  std::uint64_t challenge_window() const { return challenge_window_; }
  const OptimisticClaim* pending_claim() const;
  const OptimisticClaim* claim(std::uint64_t id) const;
  const std::vector<OptimisticClaim>& claims() const { return claims_; }

  std::string to_json() const;
  static SettlementContract from_json(std::string_view json);

 private:
  void finalize(const StateRoot& pre, const StateRoot& post, const BatchCommitment& c,
                SettlementMode mode);

  std::uint64_t challenge_window_;
  StateRoot canonical_root_;
  std::vector<FinalizedTransition> history_;
  std::vector<OptimisticClaim> claims_;
  std::optional<std::size_t> pending_;
  std::uint64_t clock_ = 0;
};

}  // namespace vapp
