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

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "support.hpp"
#include "vapp/vapp.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using vapp::testing::TempDir;

struct Cli {
  int exit_code = -1;
  std::vector<std::string> lines;
};

Cli vappctl(const std::string& args) {
  std::string cmd = std::string(VAPPCTL_PATH) + " " + args + " 2>/dev/null";
  Cli out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return out;
  std::array<char, 4096> buf{};
  std::string acc;
  while (std::fgets(buf.data(), buf.size(), pipe) != nullptr) acc += buf.data();
  int status = ::pclose(pipe);
  out.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::size_t start = 0;
  while (start < acc.size()) {
    auto end = acc.find('\n', start);
    if (end == std::string::npos) end = acc.size();
    out.lines.push_back(acc.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

void collect(const char* line, void* user) { static_cast<std::vector<std::string>*>(user)->push_back(line); }

struct Fixture {
  TempDir dir;
  fs::path config;
  fs::path alice_key;
  std::string alice;
  std::string bob;

  explicit Fixture(const char* mode, bool in_process = true) {
    alice_key = dir.path() / "alice.key";
    char pk[65], addr[65];
    EXPECT_EQ(vapp_keygen(alice_key.c_str(), pk, addr), VAPP_OK);
    alice = addr;
    EXPECT_EQ(vapp_keygen((dir.path() / "bob.key").c_str(), pk, addr), VAPP_OK);
    bob = addr;
    json j = {{"data_dir", "data"},
              {"mode", mode},
              {"challenge_window", 5},
              {"max_batch_size", 4},
              {"in_process_watcher", in_process},
              {"genesis", json::array({{{"address", alice}, {"amount", "1000"}}})}};
    config = dir.path() / "vapp.json";
    std::ofstream(config) << j.dump(2);
  }

  std::string cfg() const { return "-c " + config.string(); }
};

TEST(CApi, KeysAndEnvelopes) {
  TempDir dir;
  auto path = dir.path() / "k.key";
  char pk[65], addr[65], pk2[65], addr2[65];
  ASSERT_EQ(vapp_keygen(path.c_str(), pk, addr), VAPP_OK);
  EXPECT_EQ(fs::status(path).permissions() & fs::perms::others_read, fs::perms::none);
  ASSERT_EQ(vapp_key_info(path.c_str(), pk2, addr2), VAPP_OK);
  EXPECT_STREQ(pk, pk2);
  EXPECT_STREQ(addr, addr2);
  EXPECT_EQ(vapp::Digest::from_hex(addr),
            vapp::testing::ext_sha256(vapp::from_hex(pk)));
  EXPECT_EQ(vapp_keygen(path.c_str(), pk, addr), VAPP_INVALID_ARGUMENT);

  vapp_buffer buf{nullptr, 0};
  ASSERT_EQ(vapp_make_transfer(path.c_str(), addr, "12", 3, &buf), VAPP_OK);
  EXPECT_EQ(buf.len, 190U);
  char digest[65];
  ASSERT_EQ(vapp_envelope_digest(buf.data, buf.len, digest), VAPP_OK);
  EXPECT_EQ(std::string(digest),
            vapp::testing::ext_sha256(vapp::ByteView(buf.data, buf.len)).hex());
  EXPECT_EQ(vapp_envelope_digest(buf.data, buf.len - 1, digest), VAPP_MALFORMED);
  vapp_buffer_free(&buf);
  EXPECT_EQ(buf.data, nullptr);

  EXPECT_EQ(vapp_make_transfer(path.c_str(), "zz", "12", 0, &buf), VAPP_INVALID_ARGUMENT);
  EXPECT_EQ(vapp_make_transfer(path.c_str(), addr, "-1", 0, &buf), VAPP_INVALID_ARGUMENT);
  EXPECT_STRNE(vapp_last_error(), "");
  EXPECT_EQ(vapp_key_info((dir.path() / "missing").c_str(), pk, addr), VAPP_IO);
}

TEST(CApi, NodeLifecycle) {
  Fixture f("replay");
  vapp_node* node = nullptr;
  ASSERT_EQ(vapp_node_open(f.config.c_str(), &node), VAPP_OK);
  char bal[40];
  ASSERT_EQ(vapp_node_balance(node, f.alice.c_str(), bal), VAPP_OK);
  EXPECT_STREQ(bal, "1000");

  vapp_buffer env{nullptr, 0};
  ASSERT_EQ(vapp_make_transfer(f.alice_key.c_str(), f.bob.c_str(), "250", 0, &env), VAPP_OK);
  vapp_preconfirmation p;
  ASSERT_EQ(vapp_node_submit(node, env.data, env.len, &p), VAPP_OK);
  char seq_key[65];
  ASSERT_EQ(vapp_node_sequencer_key(node, seq_key), VAPP_OK);
  EXPECT_EQ(vapp_verify_preconfirmation(&p, seq_key), VAPP_OK);
  p.sequence += 1;
  EXPECT_EQ(vapp_verify_preconfirmation(&p, seq_key), VAPP_REJECTED);

  EXPECT_EQ(vapp_node_submit(node, env.data, env.len, &p), VAPP_REJECTED);
  EXPECT_STREQ(vapp_last_error(), "DuplicateNonce");
  vapp_buffer_free(&env);

  std::uint64_t nonce = 0;
  ASSERT_EQ(vapp_node_next_nonce(node, f.alice.c_str(), &nonce), VAPP_OK);
  EXPECT_EQ(nonce, 1U);

  std::vector<std::string> lines;
  ASSERT_EQ(vapp_node_seal(node, collect, &lines), VAPP_OK);
  ASSERT_EQ(lines.size(), 1U);
  auto report = json::parse(lines[0]);
  EXPECT_EQ(report["batch"], 1);
  EXPECT_EQ(report["finalized"], true);
  EXPECT_EQ(vapp_node_seal(node, collect, &lines), VAPP_NO_WORK);

  char root[65], canonical[65];
  vapp_node_state_root(node, root);
  vapp_node_canonical_root(node, canonical);
  EXPECT_STREQ(root, canonical);
  vapp_node_balance(node, f.bob.c_str(), bal);
  EXPECT_STREQ(bal, "250");

  lines.clear();
  ASSERT_EQ(vapp_node_query(node, f.bob.c_str(), "Transfer", -1, -1, collect, &lines), VAPP_OK);
  ASSERT_EQ(lines.size(), 1U);
  EXPECT_EQ(json::parse(lines[0])["amt"], "250");

  lines.clear();
  ASSERT_EQ(vapp_node_dump_state(node, collect, &lines), VAPP_OK);
  EXPECT_EQ(json::parse(lines[0])["root"], root);
  EXPECT_EQ(lines.size(), 4U);
  vapp_node_close(node);

  EXPECT_EQ(vapp_node_open((f.dir.path() / "absent.json").c_str(), &node), VAPP_IO);
  EXPECT_EQ(vapp_node_open(nullptr, &node), VAPP_INVALID_ARGUMENT);
}

TEST(CApi, VerifyProofFile) {
  Fixture f("replay");
  vapp_node* node = nullptr;
  ASSERT_EQ(vapp_node_open(f.config.c_str(), &node), VAPP_OK);
  vapp_node_close(node);
  auto proof = f.dir.path() / "data" / "proofs" / "batch-0.vproof";
  std::vector<std::string> lines;
  ASSERT_EQ(vapp_verify_proof_file(proof.c_str(), nullptr, nullptr, nullptr, -1, collect, &lines), VAPP_OK);
  auto j = json::parse(lines.at(0));
  EXPECT_EQ(j["accepted"], true);
  EXPECT_EQ(j["kind"], "Replay");

  std::string wrong(64, '0');
  lines.clear();
  EXPECT_EQ(vapp_verify_proof_file(proof.c_str(), wrong.c_str(), nullptr, nullptr, -1, collect, &lines),
            VAPP_REJECTED);
  EXPECT_EQ(json::parse(lines.at(0))["reason"], "TripleMismatch");
  EXPECT_EQ(vapp_verify_proof_file(proof.c_str(), "xyz", nullptr, nullptr, -1, collect, &lines),
            VAPP_INVALID_ARGUMENT);
}

TEST(Cli, EndToEndReplay) {
  Fixture f("replay");
  auto key = f.alice_key.string();
  auto r = vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 100");
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(json::parse(r.lines.at(0))["sequence"], 1);
  r = vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 5000");
  EXPECT_EQ(r.exit_code, 0);
  r = vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 1 --nonce 0");
  EXPECT_EQ(r.exit_code, 1);

  r = vappctl("run " + f.cfg());
  ASSERT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.lines.size(), 1U);
  auto report = json::parse(r.lines[0]);
  EXPECT_EQ(report["tx_count"], 2);
  EXPECT_EQ(report["rejected"], 1);

  r = vappctl("query " + f.cfg() + " --address " + f.bob);
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.lines.size(), 1U);

  r = vappctl("verify-proof " + (f.dir.path() / "data/proofs/batch-1.vproof").string());
  EXPECT_EQ(r.exit_code, 0);
  r = vappctl("verify-proof " + (f.dir.path() / "data/proofs/batch-1.vproof").string() + " --tx-count 3");
  EXPECT_EQ(r.exit_code, 1);

  r = vappctl("dump-state " + f.cfg());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(vappctl("frobnicate").exit_code, 2);
  EXPECT_EQ(vappctl("submit-tx " + f.cfg()).exit_code, 2);
  EXPECT_EQ(vappctl("seal " + f.cfg()).exit_code, 1);
}

TEST(Cli, FaultInjectionAndExternalWatcher) {
  Fixture f("optimistic", false);
  auto key = f.alice_key.string();
  ASSERT_EQ(vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 10").exit_code, 0);
  ASSERT_EQ(vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 20").exit_code, 0);
  auto r = vappctl("run " + f.cfg() + " --inject-fault 1 --fault-tx 1");
  ASSERT_EQ(r.exit_code, 0);
  auto report = json::parse(r.lines.at(0));
  EXPECT_EQ(report["fault_injected"], true);
  EXPECT_EQ(report["finalized"], false);

  r = vappctl("watch " + f.cfg());
  EXPECT_EQ(r.exit_code, 1);
  r = vappctl("watch " + f.cfg() + " --submit");
  EXPECT_EQ(r.exit_code, 1);
  r = vappctl("watch " + f.cfg());
  EXPECT_EQ(r.exit_code, 0);

  r = vappctl("run " + f.cfg());
  ASSERT_EQ(r.exit_code, 0);
  vapp_node* node = nullptr;
  ASSERT_EQ(vapp_node_open(f.config.c_str(), &node), VAPP_OK);
  char root[65], canonical[65], bal[40];
  vapp_node_state_root(node, root);
  vapp_node_canonical_root(node, canonical);
  EXPECT_STREQ(root, canonical);
  vapp_node_balance(node, f.bob.c_str(), bal);
  EXPECT_STREQ(bal, "30");
  vapp_node_close(node);
}

TEST(Cli, InProcessWatcherRevertsFault) {
  Fixture f("optimistic");
  auto key = f.alice_key.string();
  ASSERT_EQ(vappctl("submit-tx " + f.cfg() + " --key " + key + " --to " + f.bob + " --amount 10").exit_code, 0);
  auto r = vappctl("run " + f.cfg() + " --inject-fault 1");
  ASSERT_EQ(r.exit_code, 0);
  auto report = json::parse(r.lines.at(0));
  EXPECT_EQ(report["reverted"], true);
  EXPECT_EQ(report["finalized"], true);
  EXPECT_EQ(report["fraud_proofs"], json::array({0}));
}

}  // namespace
