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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sdlm {

using TokenId = std::size_t;

// A token sequence is the context w_1..w_k handed to a model, or a text
// after whitespace tokenization.
using TokenSequence = std::vector<std::string>;

// Splits on ASCII whitespace. Newlines in rendered templates are token
// boundaries, nothing more.
TokenSequence tokenize(std::string_view text);

std::string join_tokens(std::span<const std::string> tokens);

// Ordered set of distinct tokens; positions 0..size()-1.
class Vocabulary {
 public:
  // Throws ValidationError on duplicates, empty tokens, or fewer than two
  // entries.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<TokenId> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  // Throws VocabularyError for unknown tokens.
  TokenId id(std::string_view token) const;

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace sdlm
