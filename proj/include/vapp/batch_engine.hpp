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

#include <span>
#include <vector>

#include "vapp/execution_log.hpp"

namespace vapp {

struct BatchExecution {
  StateRoot pre_root;
  StateRoot post_root;
  BatchCommitment commitment;
  ExecutionLog log;
  std::vector<Receipt> receipts;
};

/// Applies envelopes in order and builds the batch's execution log.
/// Rejected transactions are committed to in C and receive receipts but do
/// not change state. Throws kEmptyBatch for an empty list; on any store
/// failure the whole batch is rolled back before the error propagates.
BatchExecution apply_batch(std::span<const TransactionEnvelope> envelopes,
                           AuthenticatedStore& store);

}  // namespace vapp
