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

#include "sdlm/vocabulary.h"

#include <cctype>

#include "sdlm/error.h"

namespace sdlm {

TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.size() < 2) {
    throw ValidationError("vocabulary needs at least 2 tokens, got " +
                          std::to_string(tokens_.size()));
  }
  index_.reserve(tokens_.size());
  for (TokenId i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw ValidationError("vocabulary contains an empty token");
    if (!index_.emplace(tokens_[i], i).second) {
      throw ValidationError("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw VocabularyError("token '" + std::string(token) + "' is not in the vocabulary");
}

}  // namespace sdlm
