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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace sdlm {

class HttpPool;

using AttributeScores = std::map<std::string, double>;

// Assigns each requested attribute a probability in [0, 1]. Must be safe
// to call from several threads.
class AttributeScorer {
 public:
  virtual ~AttributeScorer() = default;
  // ConfigError for attributes the scorer does not know.
  virtual AttributeScores score(std::string_view text,
                                std::span<const std::string> attributes) const = 0;
};

// Word-list test double: score = 1 - 2^-m, m = number of case-insensitive
// whole-token matches. One match crosses the 0.5 threshold.
//
// Word lists are a poor stand-in for a real attribute classifier; this
// exists for deterministic tests and desk-scale runs only.
class LexiconScorer final : public AttributeScorer {
 public:
  // ValidationError for an empty word set.
  explicit LexiconScorer(std::map<std::string, std::set<std::string>> wordlists);

  AttributeScores score(std::string_view text,
                        std::span<const std::string> attributes) const override;

  // Lower-cased runs of letters, digits, apostrophes and hyphens.
  static std::vector<std::string> words(std::string_view text);

 private:
  std::map<std::string, std::set<std::string>> wordlists_;
};

// {"attribute": ["word", ...], ...}
LexiconScorer parse_lexicon(const nlohmann::json& doc);
LexiconScorer load_lexicon(const std::filesystem::path& path);

// How requests and replies map onto a scoring service. The defaults speak
// the native protocol:
//   POST /v1/score {"text": "...", "attributes": [...]} -> {"scores": {...}}
// A Perspective-style analyze endpoint is reachable by configuration
// alone (see config/perspective_scorer.json).
struct RemoteScorerOptions {
  std::string endpoint;
  std::string path = "/v1/score";
  // JSON pointer where the text goes in the request.
  std::string text_pointer = "/text";
  // JSON pointer for the requested attributes: a list of names, or an
  // object with an empty object per name when attributes_as_object.
  std::string attributes_pointer = "/attributes";
  bool attributes_as_object = false;
  // JSON pointer into the reply; "{attribute}" is replaced by the remote
  // attribute name.
  std::string score_pointer = "/scores/{attribute}";
  // Local attribute name -> remote name; unmapped names pass through.
  std::map<std::string, std::string> attribute_names;
  // Environment variable holding the credential. Sent as the query
  // parameter `api_key_param` if set, else as a bearer token.
  std::string api_key_env;
  std::string api_key_param;

  std::size_t max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  std::size_t max_in_flight = 4;
  std::chrono::milliseconds timeout{30000};
};

// Reads the keys above from a JSON object; unknown keys are ConfigError.
RemoteScorerOptions parse_remote_scorer_options(const nlohmann::json& doc);

// Retries 429 and 5xx replies and transport failures with exponential
// backoff (initial_backoff * 2^attempt), preferring the server's
// Retry-After. After max_attempts the RemoteError carries the last
// response and its retry-after hint.
class RemoteScorer final : public AttributeScorer {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit RemoteScorer(RemoteScorerOptions options, Sleeper sleeper = {});
  ~RemoteScorer() override;

  AttributeScores score(std::string_view text,
                        std::span<const std::string> attributes) const override;

 private:
  RemoteScorerOptions options_;
  Sleeper sleeper_;
  std::string api_key_;
  std::unique_ptr<HttpPool> pool_;
};

}  // namespace sdlm
