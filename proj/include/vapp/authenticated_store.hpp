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
#include <map>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vapp/bytes.hpp"
#include "vapp/codec.hpp"

namespace vapp {

/// Depth-256 sparse Merkle tree over SHA-256(key).
///
///   leaf     = H(0x00 || key_digest || value_digest)
///   node     = H(0x01 || left || right)
///   empty    = 32 zero bytes, with per-height default subtree digests
///
/// Bit 0 of the key digest (MSB of byte 0) selects the child of the root.
inline constexpr std::size_t kTreeDepth = 256;

using StateRoot = Digest;

struct MerkleProof {
  Digest key_digest;
  /// Leaf-adjacent first: siblings[0] is the sibling of the leaf itself.
  std::vector<Digest> siblings;
  bool leaf_present = false;
  std::optional<Digest> leaf_value_digest;

  friend bool operator==(const MerkleProof&, const MerkleProof&) = default;
};

/// Wire form: key_digest, presence flag, optional value digest, then a
/// 256-bit bitmap of non-default siblings followed by only those siblings.
void encode(Encoder& enc, const MerkleProof& proof);
MerkleProof decode_merkle_proof(Decoder& dec);

/// Default digest of an empty subtree of the given height (0 = leaf).
const Digest& default_digest(std::size_t height);
const Digest& empty_root();

Digest key_digest(ByteView key);
/// SHA-256 of the canonical (length-prefixed) value encoding.
Digest value_digest(ByteView value);
Digest leaf_digest(const Digest& key_digest, const Digest& value_digest);

/// Folds `leaf` up through `siblings` along the path of `key_digest`.
Digest fold_path(const Digest& key_digest, const Digest& leaf, std::span<const Digest> siblings);

/// Stateless check. Accepts iff the (leaf or empty-leaf) digest for
/// (key, claimed) folds through the proof's siblings to `root`.
bool verify_proof(const StateRoot& root, ByteView key, const std::optional<Bytes>& claimed,
                  const MerkleProof& proof);

/// One key update whose proof is already known to verify against a common
/// old root. `new_leaf` is the replacement leaf digest (zero for deletion).
struct ProvenUpdate {
  const MerkleProof* proof;
  Digest new_leaf;
};

/// Root after applying all updates at once, using only the proofs. Key
/// digests must be distinct and the list non-empty.
StateRoot root_after_updates(std::span<const ProvenUpdate> updates);

struct Checkpoint {
  std::uint64_t token = 0;
};

class AuthenticatedStore {
 public:
  AuthenticatedStore();
  AuthenticatedStore(const AuthenticatedStore&) = delete;
  AuthenticatedStore& operator=(const AuthenticatedStore&) = delete;

  /// Key and value must be non-empty.
  StateRoot put(ByteView key, ByteView value);
  /// Deleting an absent key is a no-op.
  StateRoot erase(ByteView key);

  std::optional<Bytes> get(ByteView key) const;
  std::pair<std::optional<Bytes>, MerkleProof> get_with_proof(ByteView key) const;
  StateRoot root() const;
  std::size_t size() const;

  Checkpoint checkpoint();
  /// Restores the state at `cp` and discards it and every later checkpoint.
  /// Throws Error(kStaleCheckpoint) for unknown or already-unwound tokens.
  void rollback(Checkpoint cp);
  /// Drops `cp` (and later checkpoints) keeping the current state.
  void release(Checkpoint cp);

  /// All entries ordered by key digest.
  std::vector<std::pair<Bytes, Bytes>> entries() const;

  /// Snapshot: records of (u32 BE key length, key, u32 BE value length,
  /// value) sorted by key digest, followed by the 32-byte root.
  Bytes dump() const;
  /// Replaces the contents with a snapshot; throws Error(kCorrupt) when the
  /// trailing root does not match the rebuilt tree.
  void restore(ByteView snapshot);
  void save_snapshot(const std::filesystem::path& path) const;
  void load_snapshot(const std::filesystem::path& path);

 private:
  struct NodeKey {
    std::uint16_t depth;
    Digest prefix;
    friend bool operator==(const NodeKey&, const NodeKey&) = default;
  };
  struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const noexcept;
  };
  struct Entry {
    Bytes key;
    Bytes value;
  };
  struct JournalEntry {
    Bytes key;
    std::optional<Bytes> old_value;
  };
  struct Mark {
    std::uint64_t token;
    std::size_t journal_size;
  };

  void set_unlocked(ByteView key, const std::optional<Bytes>& value, bool journal);
  void update_path(const Digest& kd, const Digest& leaf);
  const Digest& node(std::uint16_t depth, const Digest& prefix) const;
  void set_node(std::uint16_t depth, const Digest& prefix, const Digest& value);
  std::vector<Mark>::iterator find_mark(Checkpoint cp);

  mutable std::shared_mutex mu_;
  std::map<Digest, Entry> leaves_;
  std::unordered_map<NodeKey, Digest, NodeKeyHash> nodes_;
  std::vector<JournalEntry> journal_;
  std::vector<Mark> marks_;
  std::uint64_t next_token_ = 1;
};

}  // namespace vapp
