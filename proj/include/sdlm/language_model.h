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

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "sdlm/distribution.h"
#include "sdlm/vocabulary.h"

namespace sdlm {

// Causal language model: context -> distribution over the next token.
//
// Implementations are immutable once constructed and must tolerate
// concurrent calls to next_token_distribution from several threads.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // Support of every distribution this model returns.
  virtual const Vocabulary& vocabulary() const = 0;

  virtual NextTokenDistribution next_token_distribution(
      std::span<const std::string> context) const = 0;

  // Maximum number of context tokens the model accepts, if bounded.
  virtual std::optional<std::size_t> context_limit() const { return std::nullopt; }
};

}  // namespace sdlm
