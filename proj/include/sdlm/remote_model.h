// Copyright 2026 The sdlm Authors. All Rights Reserved.
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

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "sdlm/language_model.h"

namespace sdlm {

class HttpPool;

// Largest |sum - 1| of a returned distribution that is silently repaired
// by renormalization; anything further off is rejected.
inline constexpr double kRemoteSumTolerance = 1e-4;

struct RemoteModelOptions {
  // "http://host:port" (a trailing path prefix is allowed).
  std::string endpoint;
  std::chrono::milliseconds timeout{30000};
  std::optional<std::size_t> context_limit;
  std::size_t max_connections = 8;
};

// Client for a model server speaking:
//   GET  /v1/vocab               -> {"tokens": [...]}
//   POST /v1/next_token_logprobs {"context": [...]}
//                                -> {"vocab_size": N, "logprobs": [...]}
// The vocabulary is fetched once, at construction. Safe for concurrent
// requests; connections are pooled.
class RemoteModel final : public LanguageModel {
 public:
  // Throws RemoteError if the vocabulary cannot be fetched.
  explicit RemoteModel(RemoteModelOptions options);
  ~RemoteModel() override;

  const Vocabulary& vocabulary() const override { return *vocabulary_; }
  NextTokenDistribution next_token_distribution(
      std::span<const std::string> context) const override;
  std::optional<std::size_t> context_limit() const override { return options_.context_limit; }

 private:
  RemoteModelOptions options_;
  std::unique_ptr<HttpPool> pool_;
  std::unique_ptr<Vocabulary> vocabulary_;
};

// Turns a /v1/next_token_logprobs reply body into a distribution for a
// session whose vocabulary has `vocab_size` entries. Exposed for tests.
NextTokenDistribution decode_logprob_reply(const std::string& body, std::size_t vocab_size);

}  // namespace sdlm
