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

#include "vapp/execution_log.hpp"

#include <fstream>
#include <iterator>

#include "vapp/error.hpp"

namespace vapp {

namespace {

// Smallest possible encodings, used to bound sequence counts on decode.
constexpr std::size_t kMinReadSize = 4 + 1 + 32 + 1 + 32 + 32;
constexpr std::size_t kMinWriteSize = 4 + 1 + 32 + 32 + 1 + 32;
constexpr std::size_t kMinStepSize = 4 + 2 + 4 + 32 + 8 + 64 + 1 + 4 + 4 + 32;

Bytes encode_body(const ExecutionLog& log) {
  Encoder enc;
  encode(enc, log.header);
  enc.u32(static_cast<std::uint32_t>(log.steps.size()));
  for (const auto& s : log.steps) encode(enc, s);
  enc.digest(log.final_root);
  return std::move(enc).take();
}

}  // namespace

void encode(Encoder& enc, const LogHeader& h) {
  encode(enc, h.commitment);
  enc.digest(h.pre_root);
  enc.u32(h.tx_count);
}

void encode(Encoder& enc, const StepEntry& s) {
  enc.u32(s.tx_index);
  encode(enc, s.envelope);
  encode(enc, s.status);
  enc.u32(static_cast<std::uint32_t>(s.reads.size()));
  for (const auto& r : s.reads) encode(enc, r);
  enc.u32(static_cast<std::uint32_t>(s.writes.size()));
  for (const auto& w : s.writes) encode(enc, w);
  enc.digest(s.intermediate_root);
}

void encode(Encoder& enc, const ExecutionLog& log) {
  enc.raw(encode_body(log));
  enc.digest(log.log_digest);
}

LogHeader decode_log_header(Decoder& dec) {
  LogHeader h;
  h.commitment = decode_batch_commitment(dec);
  h.pre_root = dec.digest();
  h.tx_count = dec.u32();
  return h;
}

StepEntry decode_step_entry(Decoder& dec) {
  StepEntry s;
  s.tx_index = dec.u32();
  s.envelope = decode_envelope(dec);
  s.status = decode_tx_status(dec);
  auto nreads = dec.count(kMinReadSize);
  s.reads.reserve(nreads);
  for (std::uint32_t i = 0; i < nreads; ++i) s.reads.push_back(decode_witnessed_read(dec));
  auto nwrites = dec.count(kMinWriteSize);
  s.writes.reserve(nwrites);
  for (std::uint32_t i = 0; i < nwrites; ++i) s.writes.push_back(decode_witnessed_write(dec));
  s.intermediate_root = dec.digest();
  return s;
}

ExecutionLog decode_execution_log(ByteView bytes) {
  Decoder dec(bytes);
  ExecutionLog log;
  log.header = decode_log_header(dec);
  auto nsteps = dec.count(kMinStepSize);
  log.steps.reserve(nsteps);
  for (std::uint32_t i = 0; i < nsteps; ++i) log.steps.push_back(decode_step_entry(dec));
  log.final_root = dec.digest();
  log.log_digest = dec.digest();
  dec.expect_end();
  return log;
}

Digest compute_log_digest(const ExecutionLog& log) { return sha256(encode_body(log)); }

bool step_witnesses_verify(const StepEntry& step, const StateRoot& prior_root) {
  for (const auto& r : step.reads) {
    if (r.pre_root != prior_root) return false;
    if (!verify_proof(r.pre_root, r.key, r.value, r.proof)) return false;
  }
  for (const auto& w : step.writes) {
    if (w.post_root != step.intermediate_root) return false;
    if (!verify_proof(w.post_root, w.key, w.new_value, w.proof_of_new)) return false;
  }
  if ((!step.status.ok() || step.writes.empty()) && step.intermediate_root != prior_root) {
    return false;
  }
  return step.status.ok() || step.writes.empty();
}

bool check_log_chain(const ExecutionLog& log) {
  if (log.steps.empty() || log.steps.size() != log.header.tx_count) return false;
  if (log.header.commitment.tx_count != log.header.tx_count) return false;
  StateRoot prior = log.header.pre_root;
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const auto& step = log.steps[i];
    if (step.tx_index != i) return false;
    if (!step_witnesses_verify(step, prior)) return false;
    prior = step.intermediate_root;
  }
  return log.final_root == prior && compute_log_digest(log) == log.log_digest;
}

LogBuilder::LogBuilder(const BatchCommitment& commitment, const StateRoot& pre_root) {
  log_.header = LogHeader{commitment, pre_root, commitment.tx_count};
}

const StateRoot& LogBuilder::current_root() const {
  return log_.steps.empty() ? log_.header.pre_root : log_.steps.back().intermediate_root;
}

void LogBuilder::append(StepEntry step) {
  if (step.tx_index != log_.steps.size()) {
    throw Error(ErrorCode::kOutOfOrder, "expected tx_index " + std::to_string(log_.steps.size()) +
                                            ", got " + std::to_string(step.tx_index));
  }
  if (step.tx_index >= log_.header.tx_count) {
    throw Error(ErrorCode::kOutOfOrder, "more steps than committed transactions");
  }
  const StateRoot& prior = current_root();
  for (const auto& r : step.reads) {
    if (r.pre_root != prior) throw Error(ErrorCode::kRootMismatch, "read anchored at wrong root");
    if (!verify_proof(r.pre_root, r.key, r.value, r.proof)) {
      throw Error(ErrorCode::kProofInvalid, "witnessed read does not verify");
    }
  }
  for (const auto& w : step.writes) {
    if (w.post_root != step.intermediate_root) {
      throw Error(ErrorCode::kRootMismatch, "write anchored at wrong root");
    }
    if (!verify_proof(w.post_root, w.key, w.new_value, w.proof_of_new)) {
      throw Error(ErrorCode::kProofInvalid, "witnessed write does not verify");
    }
  }
  if (!step.status.ok() && !step.writes.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "rejected step carries writes");
  }
  if (step.writes.empty() && step.intermediate_root != prior) {
    throw Error(ErrorCode::kRootMismatch, "step without writes changed the root");
  }
  log_.steps.push_back(std::move(step));
}

ExecutionLog LogBuilder::finalize(const StateRoot& final_root) && {
  if (log_.steps.empty()) throw Error(ErrorCode::kEmptyBatch, "log has no steps");
  if (log_.steps.size() != log_.header.tx_count) {
    throw Error(ErrorCode::kInvalidArgument, "log has fewer steps than committed transactions");
  }
  if (final_root != log_.steps.back().intermediate_root) {
    throw Error(ErrorCode::kRootMismatch, "final root differs from last intermediate root");
  }
  log_.final_root = final_root;
  log_.log_digest = compute_log_digest(log_);
  return std::move(log_);
}

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  return Bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void write_log_file(const std::filesystem::path& path, const ExecutionLog& log) {
  write_file_bytes(path, canonical_encode(log));
}

ExecutionLog read_log_file(const std::filesystem::path& path) {
  return decode_execution_log(read_file_bytes(path));
}

}  // namespace vapp
