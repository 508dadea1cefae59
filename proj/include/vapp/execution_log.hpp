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

#include "vapp/lifecycle.hpp"

namespace vapp {

struct LogHeader {
  BatchCommitment commitment;
  StateRoot pre_root;
  std::uint32_t tx_count = 0;

  friend bool operator==(const LogHeader&, const LogHeader&) = default;
};

/// One transaction's contribution to the log: its envelope, outcome, the
/// reads it performed, and the writes that produced the intermediate root.
struct StepEntry {
  std::uint32_t tx_index = 0;
  TransactionEnvelope envelope;
  TxStatus status;
  std::vector<WitnessedRead> reads;
  std::vector<WitnessedWrite> writes;
  StateRoot intermediate_root;

  friend bool operator==(const StepEntry&, const StepEntry&) = default;
};

/// Per-batch execution log. `log_digest` is SHA-256 over the canonical
/// encoding of every preceding field.
struct ExecutionLog {
  LogHeader header;
  std::vector<StepEntry> steps;
  StateRoot final_root;
  Digest log_digest;

  friend bool operator==(const ExecutionLog&, const ExecutionLog&) = default;
};

void encode(Encoder& enc, const LogHeader& h);
void encode(Encoder& enc, const StepEntry& s);
void encode(Encoder& enc, const ExecutionLog& log);
LogHeader decode_log_header(Decoder& dec);
StepEntry decode_step_entry(Decoder& dec);
/// Strict: rejects trailing bytes.
ExecutionLog decode_execution_log(ByteView bytes);

Digest compute_log_digest(const ExecutionLog& log);

/// Checks one step's embedded proofs against `prior_root`; returns false
/// rather than throwing.
bool step_witnesses_verify(const StepEntry& step, const StateRoot& prior_root);

/// Pure chain check with no store access: indices are 0..n-1, each step's
/// witnesses verify against the previous root, final_root is the last Sx,
/// and the digest matches.
bool check_log_chain(const ExecutionLog& log);

/// Accumulates steps for one batch. Appends are gated on embedded proofs so
/// a prover never signs off on a log it could not itself verify.
class LogBuilder {
 public:
  LogBuilder(const BatchCommitment& commitment, const StateRoot& pre_root);

  /// Throws kOutOfOrder for a non-consecutive index, kProofInvalid for a
  /// witness that does not verify, kRootMismatch for a broken chain.
  void append(StepEntry step);
  /// Throws kEmptyBatch with no steps, kRootMismatch when `final_root` is
  /// not the last intermediate root.
  ExecutionLog finalize(const StateRoot& final_root) &&;

  const LogHeader& header() const { return log_.header; }
  std::span<const StepEntry> steps() const { return log_.steps; }
  const StateRoot& current_root() const;

 private:
  ExecutionLog log_;
};

void write_log_file(const std::filesystem::path& path, const ExecutionLog& log);
ExecutionLog read_log_file(const std::filesystem::path& path);

Bytes read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, ByteView bytes);

}  // namespace vapp
