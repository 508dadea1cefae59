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
#include <span>
#include <vector>

#include "vapp/execution_log.hpp"

namespace vapp {

enum class ProofKind : std::uint8_t {
  kReplay = 1,
  kOptimisticClaim = 2,
  kAggregated = 3,
};

const char* proof_kind_name(ProofKind kind);

/// The (S, S', C) a proof speaks for.
struct ClaimedTransition {
  StateRoot pre_root;
  StateRoot post_root;
  BatchCommitment commitment;

  friend bool operator==(const ClaimedTransition&, const ClaimedTransition&) = default;
};

/// Body by kind:
///   Replay          canonical ExecutionLog
///   OptimisticClaim u32 count, then the claimed intermediate roots
///   Aggregated      u32 count, then the inner proofs back to back
struct Proof {
  ProofKind kind = ProofKind::kReplay;
  ClaimedTransition claimed;
  Bytes body;

  friend bool operator==(const Proof&, const Proof&) = default;
};

/// `.vproof` layout: u8 kind, S (32), S' (32), C (36), u64 LE body length,
/// body.
void encode(Encoder& enc, const Proof& proof);
Proof decode_proof(Decoder& dec);
Bytes encode_proof(const Proof& proof);
/// Strict whole-buffer decode.
Proof decode_proof(ByteView bytes);

void write_proof_file(const std::filesystem::path& path, const Proof& proof);
Proof read_proof_file(const std::filesystem::path& path);

/// Pluggable proving contract. A succinct backend would slot in here.
class ProofBackend {
 public:
  virtual ~ProofBackend() = default;
  virtual ProofKind kind() const = 0;
  /// Throws kNotFinalized for a log whose digest or final root is unset.
  virtual Proof prove(const ExecutionLog& log) const = 0;
};

class ReplayBackend final : public ProofBackend {
 public:
  ProofKind kind() const override { return ProofKind::kReplay; }
  Proof prove(const ExecutionLog& log) const override;
};

/// Produces a claim (triple plus intermediate roots) with no validity
/// evidence; settlement accepts it pending a challenge window.
class OptimisticBackend final : public ProofBackend {
 public:
  ProofKind kind() const override { return ProofKind::kOptimisticClaim; }
  Proof prove(const ExecutionLog& log) const override;
};

Proof prove_replay(const ExecutionLog& log);
Proof submit_to_prover(const ExecutionLog& log, const ProofBackend& backend);

Bytes encode_claim_roots(std::span<const StateRoot> roots);
/// Throws kMalformed.
std::vector<StateRoot> decode_claim_roots(ByteView body);

/// Wraps consecutive batch proofs. C of the result is the batch commitment
/// over the inner C digests. Throws kEmptyBatch for no input,
/// kChainMismatch when some S differs from the previous S', and
/// kInvalidArgument for optimistic claims.
Proof aggregate(std::span<const Proof> proofs);
/// Throws kMalformed.
std::vector<Proof> decode_aggregated_body(ByteView body);

}  // namespace vapp
