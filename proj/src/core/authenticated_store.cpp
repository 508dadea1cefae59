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

#include "vapp/authenticated_store.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>
#include <mutex>

#include "vapp/crypto.hpp"
#include "vapp/error.hpp"

namespace vapp {

namespace {

constexpr std::uint8_t kLeafTag = 0x00;
constexpr std::uint8_t kNodeTag = 0x01;

const std::array<Digest, kTreeDepth + 1>& defaults() {
  static const auto table = [] {
    std::array<Digest, kTreeDepth + 1> t{};
    for (std::size_t h = 1; h <= kTreeDepth; ++h) {
      t[h] = hash_tagged_pair(kNodeTag, t[h - 1], t[h - 1]);
    }
    return t;
  }();
  return table;
}

void flip_bit(Digest& d, std::size_t index) {
  d.bytes[index / 8] ^= static_cast<std::uint8_t>(0x80U >> (index % 8));
}

void clear_bit(Digest& d, std::size_t index) {
  d.bytes[index / 8] &= static_cast<std::uint8_t>(~(0x80U >> (index % 8)));
}

void put_be32(Bytes& out, std::size_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint32_t read_be32(ByteView in, std::size_t& pos) {
  if (in.size() - pos < 4) throw Error(ErrorCode::kCorrupt, "truncated snapshot record");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | in[pos + i];
  pos += 4;
  return v;
}

Digest combine(const Digest& key_digest, std::size_t depth, const Digest& child,
               const Digest& sibling) {
  return key_digest.bit(depth) ? hash_tagged_pair(kNodeTag, sibling, child)
                               : hash_tagged_pair(kNodeTag, child, sibling);
}

}  // namespace

const Digest& default_digest(std::size_t height) { return defaults().at(height); }

const Digest& empty_root() { return defaults()[kTreeDepth]; }

Digest key_digest(ByteView key) { return sha256(key); }

Digest value_digest(ByteView value) {
  Encoder enc;
  enc.var_bytes(value);
  return sha256(enc.bytes());
}

Digest leaf_digest(const Digest& key_digest, const Digest& value_digest) {
  return hash_tagged_pair(kLeafTag, key_digest, value_digest);
}

void encode(Encoder& enc, const MerkleProof& proof) {
  if (proof.siblings.size() != kTreeDepth) {
    throw Error(ErrorCode::kInvalidArgument, "proof must carry 256 siblings");
  }
  enc.digest(proof.key_digest);
  enc.u8(proof.leaf_present ? 1 : 0);
  if (proof.leaf_present) enc.digest(proof.leaf_value_digest.value());
  std::array<std::uint8_t, 32> bitmap{};
  for (std::size_t i = 0; i < kTreeDepth; ++i) {
    if (proof.siblings[i] != default_digest(i)) bitmap[i / 8] |= 1U << (i % 8);
  }
  enc.raw(bitmap);
  for (std::size_t i = 0; i < kTreeDepth; ++i) {
    if (bitmap[i / 8] >> (i % 8) & 1U) enc.digest(proof.siblings[i]);
  }
}

MerkleProof decode_merkle_proof(Decoder& dec) {
  MerkleProof proof;
  proof.key_digest = dec.digest();
  proof.leaf_present = dec.boolean();
  if (proof.leaf_present) proof.leaf_value_digest = dec.digest();
  auto bitmap = dec.raw(32);
  proof.siblings.resize(kTreeDepth);
  for (std::size_t i = 0; i < kTreeDepth; ++i) {
    if (bitmap[i / 8] >> (i % 8) & 1U) {
      proof.siblings[i] = dec.digest();
      // An explicit default sibling would give the same proof two encodings.
      if (proof.siblings[i] == default_digest(i)) {
        throw Error(ErrorCode::kMalformed, "non-canonical proof sibling");
      }
    } else {
      proof.siblings[i] = default_digest(i);
    }
  }
  return proof;
}

Digest fold_path(const Digest& key_digest, const Digest& leaf, std::span<const Digest> siblings) {
  Digest acc = leaf;
  for (std::size_t i = 0; i < siblings.size(); ++i) {
    acc = combine(key_digest, kTreeDepth - 1 - i, acc, siblings[i]);
  }
  return acc;
}

bool verify_proof(const StateRoot& root, ByteView key, const std::optional<Bytes>& claimed,
                  const MerkleProof& proof) {
  if (proof.siblings.size() != kTreeDepth) return false;
  if (proof.key_digest != key_digest(key)) return false;
  if (proof.leaf_present != claimed.has_value()) return false;
  if (proof.leaf_present != proof.leaf_value_digest.has_value()) return false;
  Digest leaf = Digest::zero();
  if (claimed) {
    auto vd = value_digest(*claimed);
    if (vd != *proof.leaf_value_digest) return false;
    leaf = leaf_digest(proof.key_digest, vd);
  }
  return fold_path(proof.key_digest, leaf, proof.siblings) == root;
}

namespace {

Digest fold_updates(std::span<const ProvenUpdate> sorted, std::size_t depth) {
  if (depth == kTreeDepth) {
    return sorted.front().new_leaf;
  }
  auto mid = std::partition_point(sorted.begin(), sorted.end(), [depth](const ProvenUpdate& u) {
    return !u.proof->key_digest.bit(depth);
  });
  const std::size_t sibling_index = kTreeDepth - 1 - depth;
  std::span<const ProvenUpdate> left(sorted.begin(), mid);
  std::span<const ProvenUpdate> right(mid, sorted.end());
  Digest l = left.empty() ? right.front().proof->siblings[sibling_index]
                          : fold_updates(left, depth + 1);
  Digest r = right.empty() ? left.front().proof->siblings[sibling_index]
                           : fold_updates(right, depth + 1);
  return hash_tagged_pair(kNodeTag, l, r);
}

}  // namespace

StateRoot root_after_updates(std::span<const ProvenUpdate> updates) {
  if (updates.empty()) throw Error(ErrorCode::kInvalidArgument, "no updates");
  std::vector<ProvenUpdate> sorted(updates.begin(), updates.end());
  for (const auto& u : sorted) {
    if (u.proof->siblings.size() != kTreeDepth) {
      throw Error(ErrorCode::kInvalidArgument, "proof must carry 256 siblings");
    }
  }
  std::sort(sorted.begin(), sorted.end(), [](const ProvenUpdate& a, const ProvenUpdate& b) {
    return a.proof->key_digest < b.proof->key_digest;
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].proof->key_digest == sorted[i - 1].proof->key_digest) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate key in update set");
    }
  }
  return fold_updates(sorted, 0);
}

std::size_t AuthenticatedStore::NodeKeyHash::operator()(const NodeKey& k) const noexcept {
  std::uint64_t words[4];
  std::memcpy(words, k.prefix.bytes.data(), sizeof(words));
  std::uint64_t h = k.depth * 0x9E3779B97F4A7C15ULL;
  for (auto w : words) {
    h ^= w + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

AuthenticatedStore::AuthenticatedStore() { (void)defaults(); }

const Digest& AuthenticatedStore::node(std::uint16_t depth, const Digest& prefix) const {
  auto it = nodes_.find(NodeKey{depth, prefix});
  return it == nodes_.end() ? default_digest(kTreeDepth - depth) : it->second;
}

void AuthenticatedStore::set_node(std::uint16_t depth, const Digest& prefix, const Digest& value) {
  if (value == default_digest(kTreeDepth - depth)) {
    nodes_.erase(NodeKey{depth, prefix});
  } else {
    nodes_.insert_or_assign(NodeKey{depth, prefix}, value);
  }
}

void AuthenticatedStore::update_path(const Digest& kd, const Digest& leaf) {
  Digest path = kd;
  Digest acc = leaf;
  set_node(kTreeDepth, path, acc);
  for (std::size_t d = kTreeDepth; d-- > 0;) {
    // `path` is masked to d+1 bits here.
    flip_bit(path, d);
    Digest sibling = node(static_cast<std::uint16_t>(d + 1), path);
    flip_bit(path, d);
    acc = combine(kd, d, acc, sibling);
    clear_bit(path, d);
    set_node(static_cast<std::uint16_t>(d), path, acc);
  }
}

void AuthenticatedStore::set_unlocked(ByteView key, const std::optional<Bytes>& value,
                                      bool journal) {
  auto kd = key_digest(key);
  auto it = leaves_.find(kd);
  if (journal && !marks_.empty()) {
    std::optional<Bytes> old;
    if (it != leaves_.end()) old = it->second.value;
    journal_.push_back(JournalEntry{Bytes(key.begin(), key.end()), std::move(old)});
  }
  if (value) {
    update_path(kd, leaf_digest(kd, value_digest(*value)));
    if (it == leaves_.end()) {
      leaves_.emplace(kd, Entry{Bytes(key.begin(), key.end()), *value});
    } else {
      it->second.value = *value;
    }
  } else {
    if (it == leaves_.end()) return;
    update_path(kd, Digest::zero());
    leaves_.erase(it);
  }
}

StateRoot AuthenticatedStore::put(ByteView key, ByteView value) {
  if (key.empty()) throw Error(ErrorCode::kInvalidArgument, "empty key");
  if (value.empty()) throw Error(ErrorCode::kInvalidArgument, "empty value; use erase");
  std::unique_lock lock(mu_);
  set_unlocked(key, Bytes(value.begin(), value.end()), true);
  return node(0, Digest::zero());
}

StateRoot AuthenticatedStore::erase(ByteView key) {
  std::unique_lock lock(mu_);
  set_unlocked(key, std::nullopt, true);
  return node(0, Digest::zero());
}

std::optional<Bytes> AuthenticatedStore::get(ByteView key) const {
  std::shared_lock lock(mu_);
  auto it = leaves_.find(key_digest(key));
  if (it == leaves_.end()) return std::nullopt;
  return it->second.value;
}

std::pair<std::optional<Bytes>, MerkleProof> AuthenticatedStore::get_with_proof(
    ByteView key) const {
  std::shared_lock lock(mu_);
  MerkleProof proof;
  proof.key_digest = key_digest(key);
  proof.siblings.resize(kTreeDepth);
  Digest path = proof.key_digest;
  for (std::size_t d = kTreeDepth; d-- > 0;) {
    flip_bit(path, d);
    proof.siblings[kTreeDepth - 1 - d] = node(static_cast<std::uint16_t>(d + 1), path);
    flip_bit(path, d);
    clear_bit(path, d);
  }
  std::optional<Bytes> value;
  auto it = leaves_.find(proof.key_digest);
  if (it != leaves_.end()) {
    value = it->second.value;
    proof.leaf_present = true;
    proof.leaf_value_digest = value_digest(*value);
  }
  return {std::move(value), std::move(proof)};
}

StateRoot AuthenticatedStore::root() const {
  std::shared_lock lock(mu_);
  return node(0, Digest::zero());
}

std::size_t AuthenticatedStore::size() const {
  std::shared_lock lock(mu_);
  return leaves_.size();
}

Checkpoint AuthenticatedStore::checkpoint() {
  std::unique_lock lock(mu_);
  Mark mark{next_token_++, journal_.size()};
  marks_.push_back(mark);
  return Checkpoint{mark.token};
}

std::vector<AuthenticatedStore::Mark>::iterator AuthenticatedStore::find_mark(Checkpoint cp) {
  auto it = std::find_if(marks_.begin(), marks_.end(),
                         [&](const Mark& m) { return m.token == cp.token; });
  if (it == marks_.end()) {
    throw Error(ErrorCode::kStaleCheckpoint,
                "checkpoint " + std::to_string(cp.token) + " is not live");
  }
  return it;
}

void AuthenticatedStore::rollback(Checkpoint cp) {
  std::unique_lock lock(mu_);
  auto it = find_mark(cp);
  const std::size_t target = it->journal_size;
  marks_.erase(it, marks_.end());
  while (journal_.size() > target) {
    JournalEntry entry = std::move(journal_.back());
    journal_.pop_back();
    set_unlocked(entry.key, entry.old_value, false);
  }
}

void AuthenticatedStore::release(Checkpoint cp) {
  std::unique_lock lock(mu_);
  auto it = find_mark(cp);
  marks_.erase(it, marks_.end());
  if (marks_.empty()) journal_.clear();
}

std::vector<std::pair<Bytes, Bytes>> AuthenticatedStore::entries() const {
  std::shared_lock lock(mu_);
  std::vector<std::pair<Bytes, Bytes>> out;
  out.reserve(leaves_.size());
  for (const auto& [kd, entry] : leaves_) out.emplace_back(entry.key, entry.value);
  return out;
}

Bytes AuthenticatedStore::dump() const {
  std::shared_lock lock(mu_);
  Bytes out;
  for (const auto& [kd, entry] : leaves_) {
    put_be32(out, entry.key.size());
    out.insert(out.end(), entry.key.begin(), entry.key.end());
    put_be32(out, entry.value.size());
    out.insert(out.end(), entry.value.begin(), entry.value.end());
  }
  auto r = node(0, Digest::zero());
  out.insert(out.end(), r.bytes.begin(), r.bytes.end());
  return out;
}

void AuthenticatedStore::restore(ByteView snapshot) {
  if (snapshot.size() < Digest::kSize) throw Error(ErrorCode::kCorrupt, "snapshot too short");
  const std::size_t body_end = snapshot.size() - Digest::kSize;
  auto expected = Digest::from_bytes(snapshot.subspan(body_end));

  std::unique_lock lock(mu_);
  if (!marks_.empty()) throw Error(ErrorCode::kInvalidArgument, "restore with live checkpoints");
  leaves_.clear();
  nodes_.clear();
  journal_.clear();

  ByteView body = snapshot.first(body_end);
  std::size_t pos = 0;
  std::optional<Digest> previous;
  while (pos < body.size()) {
    auto klen = read_be32(body, pos);
    if (klen == 0 || body.size() - pos < klen) throw Error(ErrorCode::kCorrupt, "bad key length");
    ByteView key = body.subspan(pos, klen);
    pos += klen;
    auto vlen = read_be32(body, pos);
    if (vlen == 0 || body.size() - pos < vlen) throw Error(ErrorCode::kCorrupt, "bad value length");
    ByteView value = body.subspan(pos, vlen);
    pos += vlen;
    auto kd = key_digest(key);
    if (previous && !(*previous < kd)) {
      throw Error(ErrorCode::kCorrupt, "snapshot records not sorted by key digest");
    }
    previous = kd;
    set_unlocked(key, Bytes(value.begin(), value.end()), false);
  }
  if (node(0, Digest::zero()) != expected) {
    throw Error(ErrorCode::kCorrupt, "snapshot root self-check failed");
  }
}

void AuthenticatedStore::save_snapshot(const std::filesystem::path& path) const {
  auto bytes = dump();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void AuthenticatedStore::load_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  restore(bytes);
}

}  // namespace vapp
