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

#ifndef VAPP_VAPP_H_
#define VAPP_VAPP_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define VAPP_API __declspec(dllexport)
#elif defined(__GNUC__)
#define VAPP_API __attribute__((visibility("default")))
#else
#define VAPP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vapp_status {
  VAPP_OK = 0,
  /* A transaction, proof or claim was refused; see vapp_last_error(). */
  VAPP_REJECTED = 1,
  VAPP_INVALID_ARGUMENT = 2,
  VAPP_MALFORMED = 3,
  VAPP_NOT_FOUND = 4,
  VAPP_CORRUPT = 5,
  VAPP_NO_WORK = 6,
  VAPP_IO = 7,
  VAPP_SETTLEMENT = 8,
  VAPP_INTERNAL = 9
} vapp_status;

typedef struct vapp_node vapp_node;

/* Receives one line-delimited JSON record per call. */
typedef void (*vapp_line_cb)(const char* line, void* user);

typedef struct vapp_buffer {
  uint8_t* data;
  size_t len;
} vapp_buffer;

typedef struct vapp_preconfirmation {
  char envelope_digest[65];
  uint64_t sequence;
  char signature[129];
} vapp_preconfirmation;

VAPP_API const char* vapp_version(void);
VAPP_API const char* vapp_status_name(vapp_status status);
/* Message for the last failing call on this thread; empty if none. */
VAPP_API const char* vapp_last_error(void);
VAPP_API void vapp_buffer_free(vapp_buffer* buf);

/* Keys are files holding a hex Ed25519 seed. Outputs are hex strings. */
VAPP_API vapp_status vapp_keygen(const char* path, char public_key[65], char address[65]);
VAPP_API vapp_status vapp_key_info(const char* path, char public_key[65], char address[65]);

/* Builds and signs a canonical transfer envelope. `amount` is decimal. */
VAPP_API vapp_status vapp_make_transfer(const char* key_path, const char* to_address,
                                        const char* amount, uint64_t nonce, vapp_buffer* out);
VAPP_API vapp_status vapp_envelope_digest(const uint8_t* envelope, size_t len, char digest[65]);
VAPP_API vapp_status vapp_verify_preconfirmation(const vapp_preconfirmation* p,
                                                 const char* sequencer_public_key);

/* Opens the node described by a config file (the data directory may be
   overridden by VAPP_DATA_DIR), recovering from its data directory. */
VAPP_API vapp_status vapp_node_open(const char* config_path, vapp_node** out);
VAPP_API void vapp_node_close(vapp_node* node);

VAPP_API vapp_status vapp_node_next_nonce(vapp_node* node, const char* address, uint64_t* out);
VAPP_API vapp_status vapp_node_balance(vapp_node* node, const char* address, char out[40]);
VAPP_API vapp_status vapp_node_state_root(vapp_node* node, char out[65]);
VAPP_API vapp_status vapp_node_canonical_root(vapp_node* node, char out[65]);
VAPP_API vapp_status vapp_node_sequencer_key(vapp_node* node, char out[65]);

/* VAPP_REJECTED with the reason (BadFormat, BadSignature, DuplicateNonce)
   in vapp_last_error() when admission fails. */
VAPP_API vapp_status vapp_node_submit(vapp_node* node, const uint8_t* envelope, size_t len,
                                      vapp_preconfirmation* out);

/* Seals one batch and drives it to settlement. VAPP_NO_WORK when the
   mempool is empty. Emits one batch report line. */
VAPP_API vapp_status vapp_node_seal(vapp_node* node, vapp_line_cb cb, void* user);

/* Settles outstanding work and drains the mempool. A non-negative
   `fault_batch` corrupts the first claim for that batch from `fault_tx`
   on (optimistic mode only). Emits one report line per batch. */
VAPP_API vapp_status vapp_node_run(vapp_node* node, int64_t fault_batch, uint32_t fault_tx,
                                   vapp_line_cb cb, void* user);

/* Event query. NULL / negative arguments leave that filter open. */
VAPP_API vapp_status vapp_node_query(vapp_node* node, const char* address, const char* kind,
                                     int64_t batch_from, int64_t batch_to, vapp_line_cb cb,
                                     void* user);

/* Emits {"root":...} then one {"key","value"} line per entry. */
VAPP_API vapp_status vapp_node_dump_state(vapp_node* node, vapp_line_cb cb, void* user);

/* Independent watcher over the data directory of `config_path`: replays
   the DA log and checks any pending claim. With `submit` set, fraud proofs
   are submitted to the settlement record. VAPP_REJECTED if a fraud proof
   was produced, VAPP_CORRUPT if replay stopped at a damaged record. */
VAPP_API vapp_status vapp_watch(const char* config_path, int submit, vapp_line_cb cb, void* user);

/* Offline Verify on a .vproof file. NULL triple arguments take the value
   claimed by the proof itself. VAPP_OK accepts, VAPP_REJECTED rejects. */
VAPP_API vapp_status vapp_verify_proof_file(const char* path, const char* post_root,
                                            const char* pre_root, const char* commitment,
                                            int64_t tx_count, vapp_line_cb cb, void* user);

#ifdef __cplusplus
}
#endif

#endif  // VAPP_VAPP_H_
