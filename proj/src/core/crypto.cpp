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

#include "vapp/crypto.hpp"

#include <openssl/evp.h>
#include <sodium.h>

#include <cstring>
#include <mutex>

#include "vapp/error.hpp"

namespace vapp {

namespace {

// Fetched once; implicit fetch inside EVP_DigestInit costs more than the
// compression function for 65-byte inputs.
const EVP_MD* sha256_md() {
  static EVP_MD* md = EVP_MD_fetch(nullptr, "SHA256", nullptr);
  return md;
}

void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw Error(ErrorCode::kIo, "libsodium initialization failed");
  });
}

struct CtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

EVP_MD_CTX* scratch_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx(EVP_MD_CTX_new());
  return ctx.get();
}

}  // namespace

struct Sha256::Impl {
  std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx{EVP_MD_CTX_new()};
};

Sha256::Sha256() : impl_(std::make_unique<Impl>()) {
  EVP_DigestInit_ex2(impl_->ctx.get(), sha256_md(), nullptr);
}

Sha256::~Sha256() = default;

Sha256& Sha256::update(ByteView data) {
  EVP_DigestUpdate(impl_->ctx.get(), data.data(), data.size());
  return *this;
}

Digest Sha256::finish() {
  Digest out;
  unsigned int len = 0;
  EVP_DigestFinal_ex(impl_->ctx.get(), out.bytes.data(), &len);
  return out;
}

Digest sha256(ByteView data) {
  auto* ctx = scratch_ctx();
  Digest out;
  unsigned int len = 0;
  EVP_DigestInit_ex2(ctx, sha256_md(), nullptr);
  EVP_DigestUpdate(ctx, data.data(), data.size());
  EVP_DigestFinal_ex(ctx, out.bytes.data(), &len);
  return out;
}

Digest hash_tagged_pair(std::uint8_t tag, const Digest& a, const Digest& b) {
  std::uint8_t buf[65];
  buf[0] = tag;
  std::memcpy(buf + 1, a.bytes.data(), 32);
  std::memcpy(buf + 33, b.bytes.data(), 32);
  return sha256(ByteView(buf, sizeof(buf)));
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
  ensure_sodium();
  KeyPair kp;
  kp.seed_ = seed;
  crypto_sign_ed25519_seed_keypair(kp.public_key_.data(), kp.secret_key_.data(), seed.data());
  return kp;
}

KeyPair KeyPair::generate() {
  ensure_sodium();
  std::array<std::uint8_t, 32> seed;
  randombytes_buf(seed.data(), seed.size());
  return from_seed(seed);
}

Signature KeyPair::sign(ByteView message) const {
  Signature sig;
  crypto_sign_ed25519_detached(sig.data(), nullptr, message.data(), message.size(),
                               secret_key_.data());
  return sig;
}

bool verify_signature(const PublicKey& key, ByteView message, const Signature& signature) {
  ensure_sodium();
  return crypto_sign_ed25519_verify_detached(signature.data(), message.data(), message.size(),
                                             key.data()) == 0;
}

}  // namespace vapp
