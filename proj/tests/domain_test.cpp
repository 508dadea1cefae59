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

#include "support.hpp"
#include "vapp/domain.hpp"
#include "vapp/error.hpp"

namespace vapp {
namespace {

using testing::ext_sha256;
using testing::make_accounts;

Digest node_hash(const Digest& l, const Digest& r) {
  Bytes buf{0x01};
  buf.insert(buf.end(), l.bytes.begin(), l.bytes.end());
  buf.insert(buf.end(), r.bytes.begin(), r.bytes.end());
  return ext_sha256(buf);
}

Digest digest_of(int i) { return ext_sha256(as_bytes("tx" + std::to_string(i))); }

TEST(Domain, DigestHexRoundTrip) {
  auto d = ext_sha256(as_bytes("abc"));
  EXPECT_EQ(d.hex(), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(Digest::from_hex(d.hex()), d);
  EXPECT_EQ(Digest::from_hex("0x" + d.hex()), d);
  EXPECT_THROW(Digest::from_hex("abcd"), Error);
  EXPECT_THROW(Digest::from_hex(std::string(64, 'g')), Error);
}

TEST(Domain, LibrarySha256MatchesExternalHasher) {
  for (std::size_t n : {0, 1, 55, 56, 63, 64, 65, 1000}) {
    Bytes data(n, static_cast<std::uint8_t>(n));
    EXPECT_EQ(sha256(data), ext_sha256(data)) << n;
  }
  Sha256 h;
  h.update(as_bytes("ab")).update(as_bytes("c"));
  EXPECT_EQ(h.finish(), ext_sha256(as_bytes("abc")));
}

TEST(Domain, AddressIsHashOfPublicKey) {
  auto acct = make_accounts(1, 3).front();
  EXPECT_EQ(acct.address.bytes, ext_sha256(acct.key.public_key()).bytes);
}

TEST(Domain, EnvelopeEncodingIsByteExact) {
  auto acct = make_accounts(2, 4);
  auto env = make_transfer(acct[0].key, acct[1].address, Balance{258}, 7);
  Bytes bytes = canonical_encode(env);
  ASSERT_EQ(bytes.size(), 2 + 4 + 80 + 32 + 8 + 64);
  EXPECT_EQ(bytes[0], 0x01);
  EXPECT_EQ(bytes[1], 0x00);
  EXPECT_EQ(bytes[2], 80);
  EXPECT_EQ(bytes[3], 0);
  EXPECT_EQ(bytes[6 + 64], 0x02);
  EXPECT_EQ(bytes[6 + 65], 0x01);
  EXPECT_EQ(bytes[6 + 80 + 32], 7);

  Decoder dec(bytes);
  EXPECT_EQ(decode_envelope(dec), env);
  dec.expect_end();
  EXPECT_EQ(envelope_digest(env), ext_sha256(bytes));
}

TEST(Domain, DecodersAreStrict) {
  auto acct = make_accounts(2, 5);
  auto env = make_transfer(acct[0].key, acct[1].address, Balance{1}, 0);
  Bytes bytes = canonical_encode(env);
  for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
    Decoder dec(ByteView(bytes).first(cut));
    EXPECT_THROW(decode_envelope(dec), Error) << cut;
  }
  EXPECT_FALSE(parse_transfer_payload(Bytes(79, 0)));
  EXPECT_FALSE(parse_transfer_payload(Bytes(81, 0)));
  EXPECT_TRUE(parse_transfer_payload(Bytes(80, 0)));
}

TEST(Domain, SignaturesBindEveryField) {
  auto acct = make_accounts(3, 6);
  auto env = make_transfer(acct[0].key, acct[1].address, Balance{5}, 1);
  EXPECT_TRUE(verify_envelope_signature(env));

  auto other_key = env;
  other_key.sender_public_key = acct[2].key.public_key();
  EXPECT_FALSE(verify_envelope_signature(other_key));

  auto other_nonce = env;
  other_nonce.nonce = 2;
  EXPECT_FALSE(verify_envelope_signature(other_nonce));

  auto other_payload = env;
  other_payload.payload[70] ^= 1;
  EXPECT_FALSE(verify_envelope_signature(other_payload));

  auto other_kind = env;
  other_kind.tx_kind = 2;
  EXPECT_FALSE(verify_envelope_signature(other_kind));

  auto resigned = env;
  resigned.signature = acct[2].key.sign(signing_digest(env).view());
  EXPECT_FALSE(verify_envelope_signature(resigned));
}

TEST(Domain, BatchCommitmentMatchesHandFold) {
  EXPECT_THROW(batch_commitment(std::vector<Digest>{}), Error);

  auto one = batch_commitment(std::vector<Digest>{digest_of(0)});
  EXPECT_EQ(one.digest, digest_of(0));
  EXPECT_EQ(one.tx_count, 1U);

  std::vector<Digest> three{digest_of(0), digest_of(1), digest_of(2)};
  auto c3 = batch_commitment(three);
  EXPECT_EQ(c3.digest, node_hash(node_hash(three[0], three[1]), node_hash(three[2], Digest::zero())));
  EXPECT_EQ(c3.tx_count, 3U);

  std::vector<Digest> five;
  for (int i = 0; i < 5; ++i) five.push_back(digest_of(i));
  auto l1a = node_hash(five[0], five[1]);
  auto l1b = node_hash(five[2], five[3]);
  auto l1c = node_hash(five[4], Digest::zero());
  auto expected = node_hash(node_hash(l1a, l1b), node_hash(l1c, Digest::zero()));
  EXPECT_EQ(batch_commitment(five).digest, expected);

  std::swap(five[1], five[2]);
  EXPECT_NE(batch_commitment(five).digest, expected);
}

TEST(Domain, BatchInclusionPaths) {
  for (int n = 1; n <= 9; ++n) {
    std::vector<Digest> leaves;
    for (int i = 0; i < n; ++i) leaves.push_back(digest_of(i));
    auto c = batch_commitment(leaves);
    for (int i = 0; i < n; ++i) {
      auto path = batch_inclusion_path(leaves, i);
      EXPECT_TRUE(verify_batch_inclusion(c, leaves[i], i, path));
      EXPECT_FALSE(verify_batch_inclusion(c, digest_of(100), i, path));
      if (n > 1) EXPECT_FALSE(verify_batch_inclusion(c, leaves[i], (i + 1) % n, path));
    }
  }
}

TEST(Domain, BalanceParsingAndArithmetic) {
  EXPECT_EQ(Balance::parse("0").amount, 0U);
  EXPECT_EQ(Balance::parse("340282366920938463463374607431768211455"), Balance{Balance::kMax});
  EXPECT_THROW(Balance::parse("340282366920938463463374607431768211456"), Error);
  EXPECT_THROW(Balance::parse("12a"), Error);
  EXPECT_THROW(Balance::parse(""), Error);
  EXPECT_EQ(Balance{Balance::kMax}.to_string(), "340282366920938463463374607431768211455");
  EXPECT_FALSE(Balance{Balance::kMax}.checked_add(Balance{1}));
  EXPECT_FALSE(Balance{1}.checked_sub(Balance{2}));
  EXPECT_EQ(Balance{5}.checked_sub(Balance{5})->amount, 0U);
}

TEST(Domain, StateKeysAreNamespacedHashes) {
  auto acct = make_accounts(1, 8).front();
  Bytes pre(std::string_view("vrc20/balance").begin(), std::string_view("vrc20/balance").end());
  pre.insert(pre.end(), acct.address.bytes.begin(), acct.address.bytes.end());
  auto d = ext_sha256(pre);
  EXPECT_EQ(balance_key(acct.address), Bytes(d.bytes.begin(), d.bytes.end()));
  EXPECT_NE(balance_key(acct.address), nonce_key(acct.address));

  EXPECT_EQ(decode_balance_value(encode_balance_value(Balance{77}))->amount, 77U);
  EXPECT_FALSE(decode_balance_value(Bytes(15, 0)));
  EXPECT_EQ(*decode_nonce_value(encode_nonce_value(9)), 9U);
  EXPECT_FALSE(decode_nonce_value(Bytes(9, 0)));
}

TEST(Domain, GenesisEnvelopeRoundTrip) {
  auto acct = make_accounts(2, 9);
  auto env = make_genesis({{acct[0].address, Balance{10}}, {acct[1].address, Balance{20}}});
  EXPECT_EQ(env.tx_kind, 0);
  auto g = parse_genesis_payload(env.payload);
  ASSERT_TRUE(g);
  ASSERT_EQ(g->grants.size(), 2U);
  EXPECT_EQ(g->grants[1].amount.amount, 20U);
}

}  // namespace
}  // namespace vapp
