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

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vapp/vapp.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitReject = 1;
constexpr int kExitUsage = 2;

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int report(vapp_status status) {
  if (status == VAPP_OK) return kExitOk;
  const char* msg = vapp_last_error();
  std::fprintf(stderr, "vappctl: %s%s%s\n", vapp_status_name(status), *msg ? ": " : "", msg);
  if (status == VAPP_INVALID_ARGUMENT) return kExitUsage;
  return kExitReject;
}

struct NodeHandle {
  vapp_node* node = nullptr;
  ~NodeHandle() { vapp_node_close(node); }
};

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vappctl: operate a verifiable-application node"};
  app.require_subcommand(1);
  std::string config = "vapp.json";

  auto* keygen = app.add_subcommand("keygen", "Generate an Ed25519 key file");
  std::string key_out;
  keygen->add_option("--out", key_out, "Key file to create")->required();

  auto* submit = app.add_subcommand("submit-tx", "Sign a transfer and submit it to the sequencer");
  std::string key_path, to, amount, env_file;
  std::optional<std::uint64_t> nonce;
  submit->add_option("-c,--config", config, "Node config file");
  auto* key_opt = submit->add_option("--key", key_path, "Sender key file");
  submit->add_option("--to", to, "Recipient address (hex)");
  submit->add_option("--amount", amount, "Amount (decimal)");
  submit->add_option("--nonce", nonce, "Nonce; defaults to the next free one");
  auto* file_opt = submit->add_option("--file", env_file, "Pre-encoded envelope file")
                       ->check(CLI::ExistingFile);
  file_opt->excludes(key_opt);

  auto* seal = app.add_subcommand("seal", "Seal one batch and settle it");
  seal->add_option("-c,--config", config, "Node config file");

  auto* run = app.add_subcommand("run", "Settle outstanding work and drain the mempool");
  std::int64_t fault_batch = -1;
  std::uint32_t fault_tx = 0;
  run->add_option("-c,--config", config, "Node config file");
  run->add_option("--inject-fault", fault_batch, "Corrupt the claim for this batch index");
  run->add_option("--fault-tx", fault_tx, "First corrupted transaction within the batch");

  auto* watch = app.add_subcommand("watch", "Replay the DA log and challenge a pending claim");
  bool submit_fraud = false;
  watch->add_option("-c,--config", config, "Node config file");
  watch->add_flag("--submit", submit_fraud, "Submit any fraud proof to settlement");

  auto* verify = app.add_subcommand("verify-proof", "Run Verify on a .vproof file");
  std::string proof_path, post_root, pre_root, commitment;
  std::int64_t tx_count = -1;
  verify->add_option("proof", proof_path, "Proof file")->required();
  verify->add_option("--post", post_root, "S' (defaults to the proof's claim)");
  verify->add_option("--pre", pre_root, "S (defaults to the proof's claim)");
  verify->add_option("--commitment", commitment, "C digest (defaults to the proof's claim)");
  verify->add_option("--tx-count", tx_count, "C transaction count");

  auto* query = app.add_subcommand("query", "Query indexed events");
  std::string address, kind;
  std::int64_t batch_from = -1, batch_to = -1;
  query->add_option("-c,--config", config, "Node config file");
  query->add_option("--address", address, "Sender or recipient address");
  query->add_option("--kind", kind, "Event kind");
  query->add_option("--from-batch", batch_from, "First batch (inclusive)");
  query->add_option("--to-batch", batch_to, "Last batch (inclusive)");

  auto* dump = app.add_subcommand("dump-state", "Print the state root and every entry");
  dump->add_option("-c,--config", config, "Node config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*keygen) {
    char pk[65], addr[65];
    auto st = vapp_keygen(key_out.c_str(), pk, addr);
    if (st == VAPP_OK) std::printf("{\"public_key\":\"%s\",\"address\":\"%s\"}\n", pk, addr);
    return report(st);
  }

  if (*verify) {
    return report(vapp_verify_proof_file(proof_path.c_str(), opt(post_root), opt(pre_root),
                                         opt(commitment), tx_count, print_line, nullptr));
  }

  if (*watch) return report(vapp_watch(config.c_str(), submit_fraud ? 1 : 0, print_line, nullptr));

  if (*submit && env_file.empty() && (key_path.empty() || to.empty() || amount.empty())) {
    std::fprintf(stderr, "vappctl: submit-tx needs --file or --key, --to and --amount\n");
    return kExitUsage;
  }

  NodeHandle h;
  if (auto st = vapp_node_open(config.c_str(), &h.node); st != VAPP_OK) return report(st);

  if (*submit) {
    std::vector<std::uint8_t> env;
    if (!env_file.empty()) {
      std::ifstream in(env_file, std::ios::binary);
      env.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    } else {
      char pk[65], addr[65];
      if (auto st = vapp_key_info(key_path.c_str(), pk, addr); st != VAPP_OK) return report(st);
      std::uint64_t n = 0;
      if (nonce) {
        n = *nonce;
      } else if (auto st = vapp_node_next_nonce(h.node, addr, &n); st != VAPP_OK) {
        return report(st);
      }
      vapp_buffer buf{nullptr, 0};
      if (auto st = vapp_make_transfer(key_path.c_str(), to.c_str(), amount.c_str(), n, &buf);
          st != VAPP_OK) {
        return report(st);
      }
      env.assign(buf.data, buf.data + buf.len);
      vapp_buffer_free(&buf);
    }
    vapp_preconfirmation p;
    auto st = vapp_node_submit(h.node, env.data(), env.size(), &p);
    if (st == VAPP_OK) {
      std::printf("{\"envelope_digest\":\"%s\",\"sequence\":%llu,\"signature\":\"%s\"}\n",
                  p.envelope_digest, static_cast<unsigned long long>(p.sequence), p.signature);
    }
    return report(st);
  }
  if (*seal) return report(vapp_node_seal(h.node, print_line, nullptr));
  if (*run) return report(vapp_node_run(h.node, fault_batch, fault_tx, print_line, nullptr));
  if (*query) {
    return report(vapp_node_query(h.node, opt(address), opt(kind), batch_from, batch_to,
                                  print_line, nullptr));
  }
  if (*dump) return report(vapp_node_dump_state(h.node, print_line, nullptr));
  return kExitUsage;
}
