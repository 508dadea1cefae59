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

#include "vapp/sequencer.hpp"

#include <algorithm>
#include <cstring>

#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr char kMagic[4] = {'V', 'D', 'A', '1'};

std::uint32_t load_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

Bytes read_range(const std::filesystem::path& path, std::uint64_t offset, std::uint64_t len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  in.seekg(static_cast<std::streamoff>(offset));
  Bytes out(static_cast<std::size_t>(len));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(len));
  if (static_cast<std::uint64_t>(in.gcount()) != len) {
    throw Error(ErrorCode::kCorrupt, "short read in " + path.string());
  }
  return out;
}

Bytes header_bytes(const PublicKey& key) {
  Encoder enc;
  enc.raw(ByteView(reinterpret_cast<const std::uint8_t*>(kMagic), 4));
  enc.u32(DaLog::kVersion);
  enc.raw(key);
  Bytes head = std::move(enc).take();
  Digest check = sha256(head);
  head.insert(head.end(), check.bytes.begin(), check.bytes.end());
  return head;
}

}  // namespace

const char* admit_error_name(AdmitError e) {
  switch (e) {
    case AdmitError::kBadFormat: return "BadFormat";
    case AdmitError::kBadSignature: return "BadSignature";
    case AdmitError::kDuplicateNonce: return "DuplicateNonce";
  }
  return "Unknown";
}

Digest preconfirmation_message(const Digest& envelope_digest, std::uint64_t sequence) {
  Encoder enc;
  enc.digest(envelope_digest);
  enc.u64(sequence);
  return sha256(std::move(enc).take());
}

bool verify_preconfirmation(const Preconfirmation& p, const PublicKey& sequencer_key) {
  return verify_signature(sequencer_key,
                          preconfirmation_message(p.envelope_digest, p.sequence).view(),
                          p.signature);
}

bool Mempool::admit(std::uint64_t sequence, const TransactionEnvelope& env) {
  if (!seen_.emplace(env.sender(), env.nonce).second) return false;
  pending_.emplace(sequence, env);
  return true;
}

void Mempool::remember(const TransactionEnvelope& env) { seen_.emplace(env.sender(), env.nonce); }

std::vector<PendingEnvelope> Mempool::drain(std::size_t max) {
  std::vector<PendingEnvelope> out;
  while (!pending_.empty() && out.size() < max) {
    auto it = pending_.begin();
    out.push_back(PendingEnvelope{it->first, std::move(it->second)});
    pending_.erase(it);
  }
  return out;
}

std::vector<PendingEnvelope> Mempool::snapshot() const {
  std::vector<PendingEnvelope> out;
  out.reserve(pending_.size());
  for (const auto& [seq, env] : pending_) out.push_back(PendingEnvelope{seq, env});
  return out;
}

std::size_t Mempool::pending_from(const Address& sender) const {
  return static_cast<std::size_t>(std::count_if(pending_.begin(), pending_.end(), [&](const auto& e) {
    return e.second.tx_kind == static_cast<std::uint16_t>(TxKind::kTransfer) &&
           e.second.sender() == sender;
  }));
}

void encode(Encoder& enc, const Batch& b) {
  enc.u64(b.batch_index);
  enc.u64(b.first_sequence);
  enc.u32(static_cast<std::uint32_t>(b.envelopes.size()));
  for (const auto& env : b.envelopes) encode(enc, env);
  encode(enc, b.commitment);
  enc.digest(b.pre_root);
  enc.digest(b.post_root);
}

Batch decode_batch(ByteView bytes) {
  Decoder dec(bytes);
  Batch b;
  b.batch_index = dec.u64();
  b.first_sequence = dec.u64();
  auto n = dec.count(2 + 4 + 32 + 8 + 64);
  b.envelopes.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) b.envelopes.push_back(decode_envelope(dec));
  b.commitment = decode_batch_commitment(dec);
  b.pre_root = dec.digest();
  b.post_root = dec.digest();
  dec.expect_end();
  return b;
}

Sequencer::Sequencer(KeyPair key, std::uint64_t next_batch_index, std::uint64_t next_sequence)
    : key_(std::move(key)), next_batch_index_(next_batch_index), next_sequence_(next_sequence) {}

SubmitOutcome Sequencer::submit(const TransactionEnvelope& env) {
  SubmitOutcome out;
  if (env.tx_kind != static_cast<std::uint16_t>(TxKind::kTransfer)) {
    out.error = env.tx_kind == static_cast<std::uint16_t>(TxKind::kGenesis)
                    ? AdmitError::kBadSignature
                    : AdmitError::kBadFormat;
    return out;
  }
  if (!parse_transfer_payload(env.payload)) {
    out.error = AdmitError::kBadFormat;
    return out;
  }
  if (!verify_envelope_signature(env)) {
    out.error = AdmitError::kBadSignature;
    return out;
  }
  const Digest digest = envelope_digest(env);

  std::lock_guard lock(mu_);
  if (!mempool_.admit(next_sequence_, env)) {
    out.error = AdmitError::kDuplicateNonce;
    return out;
  }
  Preconfirmation p{digest, next_sequence_, {}};
  p.signature = key_.sign(preconfirmation_message(digest, p.sequence).view());
  ++next_sequence_;
  out.preconfirmation = p;
  return out;
}

void Sequencer::submit_genesis(const TransactionEnvelope& env) {
  std::lock_guard lock(mu_);
  if (next_sequence_ != 0 || next_batch_index_ != 0) {
    throw Error(ErrorCode::kInvalidArgument, "genesis must be the first submission");
  }
  mempool_.admit(next_sequence_++, env);
}

Batch Sequencer::seal_batch(std::size_t max_size) {
  if (max_size == 0) throw Error(ErrorCode::kInvalidArgument, "max batch size is zero");
  std::lock_guard lock(mu_);
  if (mempool_.empty()) throw Error(ErrorCode::kNoWork, "mempool is empty");
  auto drained = mempool_.drain(max_size);
  Batch b;
  b.batch_index = next_batch_index_++;
  b.first_sequence = drained.front().sequence;
  std::vector<Digest> digests;
  digests.reserve(drained.size());
  for (auto& p : drained) {
    digests.push_back(envelope_digest(p.envelope));
    b.envelopes.push_back(std::move(p.envelope));
  }
  b.commitment = batch_commitment(digests);
  return b;
}

void Sequencer::restore_pending(const PendingEnvelope& p) {
  std::lock_guard lock(mu_);
  mempool_.admit(p.sequence, p.envelope);
  next_sequence_ = std::max(next_sequence_, p.sequence + 1);
}

void Sequencer::remember_published(const Batch& batch) {
  std::lock_guard lock(mu_);
  for (const auto& env : batch.envelopes) mempool_.remember(env);
  next_batch_index_ = std::max(next_batch_index_, batch.batch_index + 1);
  next_sequence_ = std::max(next_sequence_, batch.first_sequence + batch.envelopes.size());
}

std::uint64_t Sequencer::next_batch_index() const {
  std::lock_guard lock(mu_);
  return next_batch_index_;
}

std::uint64_t Sequencer::next_sequence() const {
  std::lock_guard lock(mu_);
  return next_sequence_;
}

std::vector<PendingEnvelope> Sequencer::pending() const {
  std::lock_guard lock(mu_);
  return mempool_.snapshot();
}

std::size_t Sequencer::pending_from(const Address& sender) const {
  std::lock_guard lock(mu_);
  return mempool_.pending_from(sender);
}

DaLog DaLog::open_for_append(const std::filesystem::path& path, const PublicKey& key) {
  DaLog log;
  log.path_ = path;
  log.writable_ = true;
  if (!std::filesystem::exists(path) || std::filesystem::file_size(path) == 0) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    auto head = header_bytes(key);
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  log.scan(true);
  if (log.key_ != key) {
    throw Error(ErrorCode::kInvalidArgument, "DA log belongs to a different sequencer key");
  }
  return log;
}

DaLog DaLog::open_readonly(const std::filesystem::path& path) {
  DaLog log;
  log.path_ = path;
  log.scan(false);
  return log;
}

DaLog::DaLog(DaLog&& other) noexcept
    : path_(std::move(other.path_)),
      key_(other.key_),
      offsets_(std::move(other.offsets_)),
      end_(other.end_),
      damaged_at_(other.damaged_at_),
      writable_(other.writable_) {}

DaLog& DaLog::operator=(DaLog&& other) noexcept {
  path_ = std::move(other.path_);
  key_ = other.key_;
  offsets_ = std::move(other.offsets_);
  end_ = other.end_;
  damaged_at_ = other.damaged_at_;
  writable_ = other.writable_;
  return *this;
}

DaLog::~DaLog() = default;

void DaLog::scan(bool repair) {
  if (!std::filesystem::exists(path_)) throw Error(ErrorCode::kNotFound, path_.string());
  const std::uint64_t file_size = std::filesystem::file_size(path_);
  if (file_size < kHeaderSize) throw Error(ErrorCode::kCorrupt, "DA log header truncated");
  Bytes head = read_range(path_, 0, kHeaderSize);
  if (std::memcmp(head.data(), kMagic, 4) != 0) throw Error(ErrorCode::kCorrupt, "bad DA magic");
  if (load_u32(head.data() + 4) != kVersion) {
    throw Error(ErrorCode::kCorrupt, "unsupported DA log version");
  }
  std::copy(head.begin() + 8, head.begin() + 40, key_.begin());
  if (sha256(ByteView(head).first(40)) != Digest::from_bytes(ByteView(head).subspan(40))) {
    throw Error(ErrorCode::kCorrupt, "DA header checksum mismatch");
  }

  offsets_.clear();
  damaged_at_.reset();
  std::ifstream in(path_, std::ios::binary);
  std::uint64_t pos = kHeaderSize;
  while (pos < file_size) {
    if (file_size - pos < 4 + 32) {
      damaged_at_ = offsets_.size();
      break;
    }
    in.seekg(static_cast<std::streamoff>(pos));
    std::uint8_t len_bytes[4];
    in.read(reinterpret_cast<char*>(len_bytes), 4);
    const std::uint64_t len = load_u32(len_bytes);
    if (file_size - pos < 4 + len + 32) {
      damaged_at_ = offsets_.size();
      break;
    }
    Bytes record(static_cast<std::size_t>(len));
    in.read(reinterpret_cast<char*>(record.data()), static_cast<std::streamsize>(len));
    Digest check;
    in.read(reinterpret_cast<char*>(check.bytes.data()), 32);
    if (!in || sha256(record) != check) {
      damaged_at_ = offsets_.size();
      break;
    }
    offsets_.push_back(pos);
    pos += 4 + len + 32;
  }
  end_ = pos;

  if (repair && damaged_at_) {
    // Only an incomplete trailing record is a torn append; anything else
    // means the file was altered.
    std::uint64_t tail = file_size - pos;
    bool torn = tail < 4;
    if (!torn) {
      std::uint8_t len_bytes[4];
      in.clear();
      in.seekg(static_cast<std::streamoff>(pos));
      in.read(reinterpret_cast<char*>(len_bytes), 4);
      torn = tail < 4 + static_cast<std::uint64_t>(load_u32(len_bytes)) + 32;
    }
    if (!torn) throw Error(ErrorCode::kCorrupt, "DA record " + std::to_string(*damaged_at_) +
                                                    " fails its checksum");
    in.close();
    std::filesystem::resize_file(path_, pos);
    damaged_at_.reset();
  }
}

void DaLog::refresh() {
  std::lock_guard lock(mu_);
  scan(false);
}

std::uint64_t DaLog::publish(const Batch& batch) {
  std::lock_guard lock(mu_);
  if (!writable_) throw Error(ErrorCode::kInvalidArgument, "DA log opened read-only");
  if (batch.batch_index != offsets_.size()) {
    throw Error(ErrorCode::kOutOfOrder, "batch " + std::to_string(batch.batch_index) +
                                            " published at position " +
                                            std::to_string(offsets_.size()));
  }
  Bytes record = canonical_encode(batch);
  Encoder enc;
  enc.u32(static_cast<std::uint32_t>(record.size()));
  enc.raw(record);
  enc.digest(sha256(record));
  Bytes framed = std::move(enc).take();

  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out.write(reinterpret_cast<const char*>(framed.data()), static_cast<std::streamsize>(framed.size()));
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "append to " + path_.string() + " failed");
  const std::uint64_t offset = end_;
  offsets_.push_back(offset);
  end_ += framed.size();
  return offset;
}

Bytes DaLog::read_record(std::uint64_t index) const {
  std::lock_guard lock(mu_);
  if (index >= offsets_.size()) {
    if (damaged_at_ && index >= *damaged_at_) {
      throw Error(ErrorCode::kCorrupt, "DA record " + std::to_string(index) + " is damaged");
    }
    throw Error(ErrorCode::kNotFound, "no DA record " + std::to_string(index));
  }
  const std::uint64_t offset = offsets_[index];
  const std::uint64_t limit = index + 1 < offsets_.size() ? offsets_[index + 1] : end_;
  Bytes framed = read_range(path_, offset, limit - offset);
  const std::uint64_t len = load_u32(framed.data());
  if (len + 4 + 32 != framed.size()) throw Error(ErrorCode::kCorrupt, "DA record length changed");
  ByteView record = ByteView(framed).subspan(4, static_cast<std::size_t>(len));
  if (sha256(record) != Digest::from_bytes(ByteView(framed).subspan(4 + len))) {
    throw Error(ErrorCode::kCorrupt, "DA record " + std::to_string(index) + " checksum mismatch");
  }
  return Bytes(record.begin(), record.end());
}

Batch DaLog::read_batch(std::uint64_t index) const {
  Bytes record = read_record(index);
  Batch b;
  try {
    b = decode_batch(record);
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorrupt, std::string("DA record does not decode: ") + e.what());
  }
  if (b.batch_index != index) throw Error(ErrorCode::kCorrupt, "DA record index mismatch");
  return b;
}

}  // namespace vapp
