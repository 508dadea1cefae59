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

#include "vapp/prover.hpp"

#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr std::size_t kProofHeaderSize = 1 + 32 + 32 + 36 + 8;

void require_finalized(const ExecutionLog& log) {
  if (log.steps.empty() || log.final_root != log.steps.back().intermediate_root ||
      compute_log_digest(log) != log.log_digest) {
    throw Error(ErrorCode::kNotFinalized, "execution log is not finalized");
  }
}

ClaimedTransition transition_of(const ExecutionLog& log) {
  return ClaimedTransition{log.header.pre_root, log.final_root, log.header.commitment};
}

}  // namespace

const char* proof_kind_name(ProofKind kind) {
  switch (kind) {
    case ProofKind::kReplay: return "Replay";
    case ProofKind::kOptimisticClaim: return "OptimisticClaim";
    case ProofKind::kAggregated: return "Aggregated";
  }
  return "Unknown";
}

void encode(Encoder& enc, const Proof& proof) {
  enc.u8(static_cast<std::uint8_t>(proof.kind));
  enc.digest(proof.claimed.pre_root);
  enc.digest(proof.claimed.post_root);
  encode(enc, proof.claimed.commitment);
  enc.u64(proof.body.size());
  enc.raw(proof.body);
}

Proof decode_proof(Decoder& dec) {
  Proof proof;
  auto kind = dec.u8();
  if (kind < 1 || kind > 3) throw Error(ErrorCode::kMalformed, "unknown proof kind");
  proof.kind = static_cast<ProofKind>(kind);
  proof.claimed.pre_root = dec.digest();
  proof.claimed.post_root = dec.digest();
  proof.claimed.commitment = decode_batch_commitment(dec);
  auto len = dec.u64();
  if (len > dec.remaining()) throw Error(ErrorCode::kMalformed, "proof body length exceeds input");
  auto body = dec.raw(static_cast<std::size_t>(len));
  proof.body.assign(body.begin(), body.end());
  return proof;
}

Bytes encode_proof(const Proof& proof) { return canonical_encode(proof); }

Proof decode_proof(ByteView bytes) {
  Decoder dec(bytes);
  auto proof = decode_proof(dec);
  dec.expect_end();
  return proof;
}

void write_proof_file(const std::filesystem::path& path, const Proof& proof) {
  write_file_bytes(path, encode_proof(proof));
}

Proof read_proof_file(const std::filesystem::path& path) {
  return decode_proof(ByteView(read_file_bytes(path)));
}

Proof ReplayBackend::prove(const ExecutionLog& log) const {
  require_finalized(log);
  return Proof{ProofKind::kReplay, transition_of(log), canonical_encode(log)};
}

Proof OptimisticBackend::prove(const ExecutionLog& log) const {
  require_finalized(log);
  std::vector<StateRoot> roots;
  roots.reserve(log.steps.size());
  for (const auto& step : log.steps) roots.push_back(step.intermediate_root);
  return Proof{ProofKind::kOptimisticClaim, transition_of(log), encode_claim_roots(roots)};
}

Proof prove_replay(const ExecutionLog& log) { return ReplayBackend{}.prove(log); }

Proof submit_to_prover(const ExecutionLog& log, const ProofBackend& backend) {
  return backend.prove(log);
}

Bytes encode_claim_roots(std::span<const StateRoot> roots) {
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(roots.size()));
  for (const auto& r : roots) enc.digest(r);
  return std::move(enc).take();
}

std::vector<StateRoot> decode_claim_roots(ByteView body) {
  Decoder dec(body);
  auto n = dec.count(32);
  std::vector<StateRoot> roots;
  roots.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) roots.push_back(dec.digest());
  dec.expect_end();
  return roots;
}

Proof aggregate(std::span<const Proof> proofs) {
  if (proofs.empty()) throw Error(ErrorCode::kEmptyBatch, "nothing to aggregate");
  std::vector<Digest> inner_commitments;
  Encoder body;
  body.u32(static_cast<std::uint32_t>(proofs.size()));
  for (std::size_t i = 0; i < proofs.size(); ++i) {
    const Proof& p = proofs[i];
    if (p.kind == ProofKind::kOptimisticClaim) {
      throw Error(ErrorCode::kInvalidArgument, "optimistic claims cannot be aggregated");
    }
    if (i > 0 && p.claimed.pre_root != proofs[i - 1].claimed.post_root) {
      throw Error(ErrorCode::kChainMismatch,
                  "proof " + std::to_string(i) + " does not start where proof " +
                      std::to_string(i - 1) + " ends");
    }
    inner_commitments.push_back(p.claimed.commitment.digest);
    encode(body, p);
  }
  ClaimedTransition claimed{proofs.front().claimed.pre_root, proofs.back().claimed.post_root,
                            batch_commitment(inner_commitments)};
  return Proof{ProofKind::kAggregated, claimed, std::move(body).take()};
}

std::vector<Proof> decode_aggregated_body(ByteView body) {
  Decoder dec(body);
  auto n = dec.count(kProofHeaderSize);
  std::vector<Proof> inner;
  inner.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) inner.push_back(decode_proof(dec));
  dec.expect_end();
  return inner;
}

}  // namespace vapp
