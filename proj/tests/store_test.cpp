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

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "support.hpp"
#include "vapp/authenticated_store.hpp"
#include "vapp/error.hpp"

namespace vapp {
namespace {

using testing::ext_sha256;
using testing::rebuild_root;
using testing::singleton_root_oracle;

Bytes b(std::string_view s) { return Bytes(s.begin(), s.end()); }

Bytes random_bytes(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len) {
  Bytes out(min_len + rng() % (max_len - min_len + 1));
  for (auto& c : out) c = static_cast<std::uint8_t>(rng());
  return out;
}

TEST(Store, EmptyRootIsFoldOfDefaults) {
  Digest acc;
  for (int h = 0; h < 256; ++h) {
    Bytes buf{0x01};
    buf.insert(buf.end(), acc.bytes.begin(), acc.bytes.end());
    buf.insert(buf.end(), acc.bytes.begin(), acc.bytes.end());
    acc = ext_sha256(buf);
  }
  EXPECT_EQ(empty_root(), acc);
  AuthenticatedStore store;
  EXPECT_EQ(store.root(), acc);
}

TEST(Store, SingletonRootMatchesHashFoldOracle) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    AuthenticatedStore store;
    Bytes k = random_bytes(rng, 1, 40);
    Bytes v = random_bytes(rng, 1, 100);
    EXPECT_EQ(store.put(k, v), singleton_root_oracle(k, v));
  }
}

TEST(Store, PutIsIdempotentAndHistoryIndependent) {
  AuthenticatedStore store;
  auto r1 = store.put(b("k"), b("v1"));
  EXPECT_EQ(store.put(b("k"), b("v1")), r1);
  store.put(b("k"), b("v2"));
  EXPECT_NE(store.root(), r1);
  EXPECT_EQ(store.put(b("k"), b("v1")), r1);
}

TEST(Store, DeleteRestoresMapping) {
  AuthenticatedStore store;
  EXPECT_EQ(store.erase(b("missing")), empty_root());
  store.put(b("k"), b("v"));
  EXPECT_EQ(store.erase(b("k")), empty_root());
  EXPECT_EQ(store.size(), 0U);

  store.put(b("k1"), b("v1"));
  store.put(b("k2"), b("v2"));
  store.erase(b("k2"));
  EXPECT_EQ(store.root(), rebuild_root({{b("k1"), b("v1")}}));
}

TEST(Store, PreconditionsRejectEmptyKeyAndValue) {
  AuthenticatedStore store;
  EXPECT_THROW(store.put(Bytes{}, b("v")), Error);
  EXPECT_THROW(store.put(b("k"), Bytes{}), Error);
}

TEST(Store, RootIndependentOfInsertionOrder) {
  std::mt19937_64 rng(5);
  std::map<Bytes, Bytes> mapping;
  for (int i = 0; i < 200; ++i) mapping[random_bytes(rng, 1, 20)] = random_bytes(rng, 1, 20);
  std::vector<std::pair<Bytes, Bytes>> items(mapping.begin(), mapping.end());
  const auto expected = rebuild_root(mapping);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(items.begin(), items.end(), rng);
    AuthenticatedStore store;
    for (const auto& [k, v] : items) store.put(k, v);
    EXPECT_EQ(store.root(), expected);
  }
}

TEST(Store, ProofsRoundTripAndRejectMisuse) {
  AuthenticatedStore empty;
  auto [absent, exclusion] = empty.get_with_proof(b("nope"));
  EXPECT_FALSE(absent);
  EXPECT_FALSE(exclusion.leaf_present);
  EXPECT_TRUE(verify_proof(empty_root(), b("nope"), std::nullopt, exclusion));

  std::mt19937_64 rng(7);
  AuthenticatedStore store;
  std::vector<Bytes> keys;
  for (int i = 0; i < 64; ++i) {
    keys.push_back(random_bytes(rng, 4, 16));
    store.put(keys.back(), random_bytes(rng, 1, 32));
  }
  const auto root = store.root();
  for (std::size_t i = 0; i < keys.size(); ++i) {
    auto [value, proof] = store.get_with_proof(keys[i]);
    ASSERT_TRUE(value);
    EXPECT_TRUE(proof.leaf_present);
    EXPECT_TRUE(verify_proof(root, keys[i], value, proof));
    Bytes other = *value;
    other.push_back(0);
    EXPECT_FALSE(verify_proof(root, keys[i], other, proof));
    EXPECT_FALSE(verify_proof(root, keys[(i + 1) % keys.size()], value, proof));
    EXPECT_FALSE(verify_proof(root, keys[i], std::nullopt, proof));

    auto flipped = proof;
    auto& sib = flipped.siblings[rng() % kTreeDepth];
    sib.bytes[rng() % 32] ^= 0x01;
    EXPECT_FALSE(verify_proof(root, keys[i], value, flipped));

    auto shortened = proof;
    shortened.siblings.pop_back();
    EXPECT_FALSE(verify_proof(root, keys[i], value, shortened));
  }

  auto [none, excl] = store.get_with_proof(b("definitely-absent"));
  EXPECT_FALSE(none);
  EXPECT_TRUE(verify_proof(root, b("definitely-absent"), std::nullopt, excl));
  EXPECT_FALSE(verify_proof(root, b("definitely-absent"), b("x"), excl));
}

TEST(Store, ProofWireFormatRoundTripsAndIsStrict) {
  AuthenticatedStore store;
  for (int i = 0; i < 10; ++i) store.put(b("key" + std::to_string(i)), b("value"));
  auto [value, proof] = store.get_with_proof(b("key3"));
  auto bytes = canonical_encode(proof);
  Decoder dec(bytes);
  EXPECT_EQ(decode_merkle_proof(dec), proof);
  dec.expect_end();

  // Trailing bytes and truncation are both malformed.
  Bytes longer = bytes;
  longer.push_back(0);
  Decoder d2(longer);
  decode_merkle_proof(d2);
  EXPECT_THROW(d2.expect_end(), Error);
  Bytes shorter(bytes.begin(), bytes.end() - 1);
  Decoder d3(shorter);
  EXPECT_THROW(decode_merkle_proof(d3), Error);
}

TEST(Store, RandomMutationsMatchRebuildOracle) {
  // 10,000 mixed puts and deletes over 1,000 keys; every 500 steps the
  // live root is compared with a from-scratch rebuild.
  std::mt19937_64 rng(2024);
  std::vector<Bytes> keys;
  for (int i = 0; i < 1000; ++i) keys.push_back(b("key-" + std::to_string(i)));
  AuthenticatedStore store;
  std::map<Bytes, Bytes> model;
  for (int step = 1; step <= 10'000; ++step) {
    const Bytes& k = keys[rng() % keys.size()];
    if (rng() % 4 == 0) {
      store.erase(k);
      model.erase(k);
    } else {
      Bytes v = random_bytes(rng, 1, 24);
      store.put(k, v);
      model[k] = v;
    }
    if (step % 500 == 0) {
      ASSERT_EQ(store.root(), rebuild_root(model)) << "step " << step;
      ASSERT_EQ(store.size(), model.size());
    }
  }
  for (int i = 0; i < 50; ++i) {
    const Bytes& k = keys[rng() % keys.size()];
    auto [value, proof] = store.get_with_proof(k);
    auto it = model.find(k);
    EXPECT_EQ(value.has_value(), it != model.end());
    EXPECT_TRUE(verify_proof(store.root(), k, value, proof));
  }
}

TEST(Store, RollbackRestoresExactState) {
  AuthenticatedStore store;
  store.put(b("a"), b("1"));
  store.put(b("b"), b("2"));
  const auto root = store.root();
  const auto entries = store.entries();

  auto cp = store.checkpoint();
  store.put(b("a"), b("changed"));
  store.erase(b("b"));
  store.put(b("c"), b("3"));
  store.rollback(cp);
  EXPECT_EQ(store.root(), root);
  EXPECT_EQ(store.entries(), entries);
  EXPECT_THROW(store.rollback(cp), Error);
}

TEST(Store, NestedCheckpointsAreLifo) {
  AuthenticatedStore store;
  store.put(b("x"), b("0"));
  const auto r0 = store.root();
  auto outer = store.checkpoint();
  store.put(b("x"), b("1"));
  const auto r1 = store.root();
  auto inner = store.checkpoint();
  store.put(b("y"), b("2"));
  store.rollback(inner);
  EXPECT_EQ(store.root(), r1);
  store.rollback(outer);
  EXPECT_EQ(store.root(), r0);

  auto a = store.checkpoint();
  store.put(b("z"), b("1"));
  auto c = store.checkpoint();
  store.put(b("z"), b("2"));
  // Rolling back the outer mark discards the inner one too.
  store.rollback(a);
  EXPECT_EQ(store.root(), r0);
  EXPECT_THROW(store.rollback(c), Error);

  auto d = store.checkpoint();
  store.put(b("w"), b("1"));
  store.release(d);
  EXPECT_THROW(store.rollback(d), Error);
  EXPECT_TRUE(store.get(b("w")));
}

TEST(Store, SnapshotRoundTripAndCorruptionDetected) {
  testing::TempDir dir;
  AuthenticatedStore store;
  for (int i = 0; i < 50; ++i) store.put(b("k" + std::to_string(i)), b("v" + std::to_string(i)));
  store.save_snapshot(dir.path() / "snap.bin");
  AuthenticatedStore loaded;
  loaded.load_snapshot(dir.path() / "snap.bin");
  EXPECT_EQ(loaded.root(), store.root());
  EXPECT_EQ(loaded.entries(), store.entries());

  Bytes dump = store.dump();
  dump[dump.size() / 2] ^= 0x40;
  AuthenticatedStore bad;
  EXPECT_THROW(bad.restore(dump), Error);
}

TEST(Store, RootAfterUpdatesMatchesLiveStore) {
  std::mt19937_64 rng(99);
  AuthenticatedStore store;
  for (int i = 0; i < 100; ++i) store.put(b("k" + std::to_string(i)), random_bytes(rng, 1, 8));
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Bytes> keys;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 6); ++i) {
      Bytes k = b("k" + std::to_string(rng() % 140));
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    std::vector<MerkleProof> proofs;
    for (const auto& k : keys) proofs.push_back(store.get_with_proof(k).second);
    std::vector<ProvenUpdate> updates;
    std::vector<std::optional<Bytes>> values;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      std::optional<Bytes> v;
      if (rng() % 3 != 0) v = random_bytes(rng, 1, 8);
      values.push_back(v);
      updates.push_back({&proofs[i], v ? leaf_digest(key_digest(keys[i]), value_digest(*v))
                                       : Digest::zero()});
    }
    auto predicted = root_after_updates(updates);
    for (std::size_t i = 0; i < keys.size(); ++i) {
      if (values[i]) store.put(keys[i], *values[i]); else store.erase(keys[i]);
    }
    EXPECT_EQ(predicted, store.root());
  }
}

}  // namespace
}  // namespace vapp
