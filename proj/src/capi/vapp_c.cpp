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

#include "vapp/vapp.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "json.hpp"
#include "vapp/error.hpp"
#include "vapp/node.hpp"

struct vapp_node {
  std::unique_ptr<vapp::Node> node;
};

namespace {

thread_local std::string g_last_error;

vapp_status set_error(vapp_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

vapp_status from_code(vapp::ErrorCode code) {
  using vapp::ErrorCode;
  switch (code) {
    case ErrorCode::kInvalidArgument: return VAPP_INVALID_ARGUMENT;
    case ErrorCode::kMalformed: return VAPP_MALFORMED;
    case ErrorCode::kNotFound: return VAPP_NOT_FOUND;
    case ErrorCode::kCorrupt: return VAPP_CORRUPT;
    case ErrorCode::kNoWork: return VAPP_NO_WORK;
    case ErrorCode::kIo: return VAPP_IO;
    case ErrorCode::kSettlementRejected: return VAPP_SETTLEMENT;
    default: return VAPP_INTERNAL;
  }
}

template <typename F>
vapp_status guarded(F&& fn) {
  g_last_error.clear();
  try {
    return fn();
  } catch (const vapp::Error& e) {
    return set_error(from_code(e.code()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(VAPP_IO, e.what());
  } catch (const std::exception& e) {
    return set_error(VAPP_INTERNAL, e.what());
  } catch (...) {
    return set_error(VAPP_INTERNAL, "unknown failure");
  }
}

void copy_hex(const std::string& hex, char* out) { std::memcpy(out, hex.c_str(), hex.size() + 1); }

void emit(vapp_line_cb cb, void* user, const std::string& line) {
  if (cb != nullptr) cb(line.c_str(), user);
}

vapp::Address parse_address(const char* hex) {
  if (hex == nullptr) throw vapp::Error(vapp::ErrorCode::kInvalidArgument, "address is required");
  return vapp::Address::from_hex(hex);
}

vapp::Digest parse_digest(const char* hex) { return vapp::Digest::from_hex(hex); }

vapp_status key_outputs(const vapp::KeyPair& key, char* public_key, char* address) {
  if (public_key != nullptr) copy_hex(vapp::to_hex(key.public_key()), public_key);
  if (address != nullptr) {
    copy_hex(vapp::Address::from_public_key(key.public_key()).hex(), address);
  }
  return VAPP_OK;
}

}  // namespace

extern "C" {

const char* vapp_version(void) { return "0.1.0"; }

const char* vapp_status_name(vapp_status status) {
  switch (status) {
    case VAPP_OK: return "ok";
    case VAPP_REJECTED: return "rejected";
    case VAPP_INVALID_ARGUMENT: return "invalid argument";
    case VAPP_MALFORMED: return "malformed";
    case VAPP_NOT_FOUND: return "not found";
    case VAPP_CORRUPT: return "corrupt";
    case VAPP_NO_WORK: return "no work";
    case VAPP_IO: return "i/o error";
    case VAPP_SETTLEMENT: return "settlement failure";
    case VAPP_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* vapp_last_error(void) { return g_last_error.c_str(); }

void vapp_buffer_free(vapp_buffer* buf) {
  if (buf == nullptr) return;
  std::free(buf->data);
  buf->data = nullptr;
  buf->len = 0;
}

vapp_status vapp_keygen(const char* path, char public_key[65], char address[65]) {
  return guarded([&] {
    if (path == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "key path is required");
    if (std::filesystem::exists(path)) {
      return set_error(VAPP_INVALID_ARGUMENT, std::string(path) + " already exists");
    }
    return key_outputs(vapp::write_key_file(path), public_key, address);
  });
}

vapp_status vapp_key_info(const char* path, char public_key[65], char address[65]) {
  return guarded([&] {
    if (path == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "key path is required");
    return key_outputs(vapp::read_key_file(path), public_key, address);
  });
}

vapp_status vapp_make_transfer(const char* key_path, const char* to_address, const char* amount,
                               uint64_t nonce, vapp_buffer* out) {
  return guarded([&] {
    if (key_path == nullptr || amount == nullptr || out == nullptr) {
      return set_error(VAPP_INVALID_ARGUMENT, "key path, amount and output are required");
    }
    auto key = vapp::read_key_file(key_path);
    auto env = vapp::make_transfer(key, parse_address(to_address), vapp::Balance::parse(amount),
                                   nonce);
    auto bytes = vapp::canonical_encode(env);
    out->data = static_cast<uint8_t*>(std::malloc(bytes.size()));
    if (out->data == nullptr) return set_error(VAPP_INTERNAL, "out of memory");
    std::memcpy(out->data, bytes.data(), bytes.size());
    out->len = bytes.size();
    return VAPP_OK;
  });
}

vapp_status vapp_envelope_digest(const uint8_t* envelope, size_t len, char digest[65]) {
  return guarded([&] {
    vapp::Decoder dec(vapp::ByteView(envelope, len));
    auto env = vapp::decode_envelope(dec);
    dec.expect_end();
    copy_hex(vapp::envelope_digest(env).hex(), digest);
    return VAPP_OK;
  });
}

vapp_status vapp_verify_preconfirmation(const vapp_preconfirmation* p,
                                        const char* sequencer_public_key) {
  return guarded([&] {
    if (p == nullptr || sequencer_public_key == nullptr) {
      return set_error(VAPP_INVALID_ARGUMENT, "preconfirmation and key are required");
    }
    vapp::Preconfirmation pc;
    pc.envelope_digest = parse_digest(p->envelope_digest);
    pc.sequence = p->sequence;
    auto sig = vapp::from_hex(p->signature);
    auto key = vapp::from_hex(sequencer_public_key);
    if (sig.size() != pc.signature.size()) return set_error(VAPP_MALFORMED, "bad signature length");
    vapp::PublicKey pk{};
    if (key.size() != pk.size()) return set_error(VAPP_MALFORMED, "bad public key length");
    std::copy(sig.begin(), sig.end(), pc.signature.begin());
    std::copy(key.begin(), key.end(), pk.begin());
    if (!vapp::verify_preconfirmation(pc, pk)) {
      return set_error(VAPP_REJECTED, "preconfirmation signature does not verify");
    }
    return VAPP_OK;
  });
}

vapp_status vapp_node_open(const char* config_path, vapp_node** out) {
  return guarded([&] {
    if (config_path == nullptr || out == nullptr) {
      return set_error(VAPP_INVALID_ARGUMENT, "config path and output are required");
    }
    auto handle = std::make_unique<vapp_node>();
    handle->node = std::make_unique<vapp::Node>(vapp::NodeConfig::load(config_path));
    *out = handle.release();
    return VAPP_OK;
  });
}

void vapp_node_close(vapp_node* node) { delete node; }

vapp_status vapp_node_next_nonce(vapp_node* node, const char* address, uint64_t* out) {
  return guarded([&] {
    if (node == nullptr || out == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    *out = node->node->next_nonce(parse_address(address));
    return VAPP_OK;
  });
}

vapp_status vapp_node_balance(vapp_node* node, const char* address, char out[40]) {
  return guarded([&] {
    if (node == nullptr || out == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    copy_hex(node->node->balance(parse_address(address)).to_string(), out);
    return VAPP_OK;
  });
}

vapp_status vapp_node_state_root(vapp_node* node, char out[65]) {
  return guarded([&] {
    if (node == nullptr || out == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    copy_hex(node->node->store().root().hex(), out);
    return VAPP_OK;
  });
}

vapp_status vapp_node_canonical_root(vapp_node* node, char out[65]) {
  return guarded([&] {
    if (node == nullptr || out == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    copy_hex(node->node->settlement().canonical_root().hex(), out);
    return VAPP_OK;
  });
}

vapp_status vapp_node_sequencer_key(vapp_node* node, char out[65]) {
  return guarded([&] {
    if (node == nullptr || out == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    copy_hex(vapp::to_hex(node->node->sequencer_key()), out);
    return VAPP_OK;
  });
}

vapp_status vapp_node_submit(vapp_node* node, const uint8_t* envelope, size_t len,
                             vapp_preconfirmation* out) {
  return guarded([&] {
    if (node == nullptr || (envelope == nullptr && len > 0)) {
      return set_error(VAPP_INVALID_ARGUMENT, "null argument");
    }
    vapp::TransactionEnvelope env;
    try {
      vapp::Decoder dec(vapp::ByteView(envelope, len));
      env = vapp::decode_envelope(dec);
      dec.expect_end();
    } catch (const vapp::Error&) {
      return set_error(VAPP_REJECTED, "BadFormat");
    }
    auto outcome = node->node->submit(env);
    if (!outcome.admitted()) return set_error(VAPP_REJECTED, vapp::admit_error_name(*outcome.error));
    if (out != nullptr) {
      copy_hex(outcome.preconfirmation->envelope_digest.hex(), out->envelope_digest);
      out->sequence = outcome.preconfirmation->sequence;
      copy_hex(vapp::to_hex(outcome.preconfirmation->signature), out->signature);
    }
    return VAPP_OK;
  });
}

vapp_status vapp_node_seal(vapp_node* node, vapp_line_cb cb, void* user) {
  return guarded([&] {
    if (node == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null node");
    emit(cb, user, vapp::batch_report_to_line(node->node->process_batch()));
    return VAPP_OK;
  });
}

vapp_status vapp_node_run(vapp_node* node, int64_t fault_batch, uint32_t fault_tx,
                          vapp_line_cb cb, void* user) {
  return guarded([&] {
    if (node == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null node");
    if (fault_batch >= 0) {
      if (node->node->config().mode != vapp::ProofMode::kOptimistic) {
        return set_error(VAPP_INVALID_ARGUMENT, "fault injection needs optimistic mode");
      }
      node->node->set_fault_plan(vapp::FaultPlan{static_cast<uint64_t>(fault_batch), fault_tx});
    }
    for (const auto& report : node->node->run()) emit(cb, user, vapp::batch_report_to_line(report));
    node->node->set_fault_plan(std::nullopt);
    return VAPP_OK;
  });
}

vapp_status vapp_node_query(vapp_node* node, const char* address, const char* kind,
                            int64_t batch_from, int64_t batch_to, vapp_line_cb cb, void* user) {
  return guarded([&] {
    if (node == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null node");
    vapp::EventFilter filter;
    if (address != nullptr) filter.address = parse_address(address);
    if (kind != nullptr) filter.kind = kind;
    if (batch_from >= 0) filter.batch_from = static_cast<uint64_t>(batch_from);
    if (batch_to >= 0) filter.batch_to = static_cast<uint64_t>(batch_to);
    for (const auto& r : node->node->query(filter)) emit(cb, user, vapp::event_to_line(r));
    return VAPP_OK;
  });
}

vapp_status vapp_node_dump_state(vapp_node* node, vapp_line_cb cb, void* user) {
  return guarded([&] {
    if (node == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "null node");
    const auto& store = node->node->store();
    emit(cb, user, nlohmann::ordered_json{{"root", store.root().hex()}}.dump());
    for (const auto& [key, value] : store.entries()) {
      emit(cb, user,
           nlohmann::ordered_json{{"key", vapp::to_hex(key)}, {"value", vapp::to_hex(value)}}.dump());
    }
    return VAPP_OK;
  });
}

vapp_status vapp_watch(const char* config_path, int submit, vapp_line_cb cb, void* user) {
  return guarded([&] {
    if (config_path == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "config path is required");
    auto config = vapp::NodeConfig::load(config_path);
    vapp::Watcher watcher(config.data_dir / "da.log");
    auto sync = watcher.sync();
    nlohmann::ordered_json j;
    j["replayed"] = sync.replayed;
    j["root"] = watcher.root().hex();
    if (sync.stopped_at) {
      j["stopped_at"] = *sync.stopped_at;
      j["error"] = sync.error;
    }
    emit(cb, user, j.dump());
    if (sync.stopped_at) return set_error(VAPP_CORRUPT, sync.error);

    const auto settlement_path = config.data_dir / "settlement.json";
    if (!std::filesystem::exists(settlement_path)) return VAPP_OK;
    auto text = vapp::read_file_bytes(settlement_path);
    auto settlement = vapp::SettlementContract::from_json(
        std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
    auto fp = watcher.challenge(settlement);
    if (!fp) return VAPP_OK;

    nlohmann::ordered_json f;
    f["fraud_proof"] = {{"claim", fp->claim_id},
                        {"tx", fp->tx_index},
                        {"claimed_root", fp->claimed_root.hex()},
                        {"bytes", vapp::to_hex(vapp::canonical_encode(*fp))}};
    if (submit != 0) {
      auto verdict = settlement.submit_fraud_proof(*fp);
      f["verdict"] = vapp::fraud_verdict_name(verdict);
      auto json = settlement.to_json();
      auto tmp = settlement_path;
      tmp += ".tmp";
      vapp::write_file_bytes(tmp, vapp::as_bytes(json));
      std::filesystem::rename(tmp, settlement_path);
    }
    emit(cb, user, f.dump());
    return set_error(VAPP_REJECTED, "pending claim diverges at tx " + std::to_string(fp->tx_index));
  });
}

vapp_status vapp_verify_proof_file(const char* path, const char* post_root, const char* pre_root,
                                   const char* commitment, int64_t tx_count, vapp_line_cb cb,
                                   void* user) {
  return guarded([&] {
    if (path == nullptr) return set_error(VAPP_INVALID_ARGUMENT, "proof path is required");
    vapp::Proof proof;
    try {
      proof = vapp::read_proof_file(path);
    } catch (const vapp::Error& e) {
      if (e.code() != vapp::ErrorCode::kMalformed) throw;
      emit(cb, user, nlohmann::ordered_json{{"accepted", false}, {"reason", "MalformedProof"}}.dump());
      return set_error(VAPP_REJECTED, e.what());
    }
    auto triple = proof.claimed;
    if (post_root != nullptr) triple.post_root = parse_digest(post_root);
    if (pre_root != nullptr) triple.pre_root = parse_digest(pre_root);
    if (commitment != nullptr) triple.commitment.digest = parse_digest(commitment);
    if (tx_count >= 0) triple.commitment.tx_count = static_cast<uint32_t>(tx_count);
    auto result = vapp::verify(triple.post_root, triple.pre_root, triple.commitment, proof);

    nlohmann::ordered_json j;
    j["accepted"] = result.accepted();
    j["kind"] = vapp::proof_kind_name(proof.kind);
    j["reason"] = vapp::verify_reason_name(result.reason);
    j["pending_challenge"] = result.pending_challenge;
    if (result.step) j["step"] = *result.step;
    j["S"] = triple.pre_root.hex();
    j["S_prime"] = triple.post_root.hex();
    j["C"] = triple.commitment.digest.hex();
    j["tx_count"] = triple.commitment.tx_count;
    emit(cb, user, j.dump());
    if (!result.accepted()) return set_error(VAPP_REJECTED, vapp::verify_reason_name(result.reason));
    return VAPP_OK;
  });
}

}  // extern "C"
