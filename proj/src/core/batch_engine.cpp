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

#include "vapp/batch_engine.hpp"

#include "vapp/error.hpp"

namespace vapp {

BatchExecution apply_batch(std::span<const TransactionEnvelope> envelopes,
                           AuthenticatedStore& store) {
  if (envelopes.empty()) throw Error(ErrorCode::kEmptyBatch, "batch has no transactions");

  std::vector<Digest> digests;
  digests.reserve(envelopes.size());
  for (const auto& env : envelopes) digests.push_back(envelope_digest(env));

  BatchExecution out;
  out.commitment = batch_commitment(digests);
  out.pre_root = store.root();

  auto batch_cp = store.checkpoint();
  try {
    LogBuilder builder(out.commitment, out.pre_root);
    for (std::size_t i = 0; i < envelopes.size(); ++i) {
      ExecContext ctx{i == 0 && out.pre_root == empty_root()};
      auto applied = apply_transaction(envelopes[i], store, ctx);
      StepEntry step;
      step.tx_index = static_cast<std::uint32_t>(i);
      step.envelope = envelopes[i];
      step.status = applied.receipt.status;
      step.reads = std::move(applied.witness.reads);
      step.writes = std::move(applied.witness.writes);
      step.intermediate_root = applied.receipt.post_root;
      builder.append(std::move(step));
      out.receipts.push_back(std::move(applied.receipt));
    }
    out.post_root = store.root();
    out.log = std::move(builder).finalize(out.post_root);
  } catch (...) {
    store.rollback(batch_cp);
    throw;
  }
  store.release(batch_cp);
  return out;
}

}  // namespace vapp
