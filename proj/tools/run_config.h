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
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlm/debias.h"
#include "sdlm/language_model.h"
#include "sdlm/scorer.h"
#include "sdlm/templates.h"

namespace sdlm::cli {

// Default credential variable for the remote scorer.
inline constexpr const char* kScorerKeyEnv = "SDLM_SCORER_API_KEY";

struct NGramParams {
  std::filesystem::path corpus;
  std::size_t order = 3;
  double smoothing_k = 1.0;
};

struct RemoteModelParams {
  std::string endpoint;
  std::optional<std::size_t> context_limit;
};

// Everything a command needs, after merging the config file and flags.
// Relative paths in a config file resolve against the file's directory.
struct RunConfig {
  std::optional<std::filesystem::path> table;
  std::optional<NGramParams> ngram;
  std::optional<std::filesystem::path> ngram_model;
  std::optional<RemoteModelParams> remote;

  std::optional<std::filesystem::path> registry;
  std::optional<std::filesystem::path> sdg_template;
  std::optional<std::filesystem::path> sdb_template;
  AnswerWords answers;
  // "all" or a list of registry names.
  std::vector<std::string> attributes{"all"};
  bool keywords = false;

  DecodingConfig decoding;
  std::string strategy = "beam";
  std::size_t beam_width = 3;
  double temperature = 1.0;

  // {"lexicon": path or word lists} or {"remote": path or options}.
  std::optional<nlohmann::json> scorer;
  std::filesystem::path base_dir = ".";
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Throws ConfigError on unknown keys or bad values.
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

// Finalizes config.decoding.strategy from strategy/beam_width/temperature/
// seed and validates.
void finalize_decoding(RunConfig& config);

std::vector<AttributeDescription> load_registry(const RunConfig& config);
// Resolves config.attributes against the registry (or the keyword list
// when config.keywords is set).
std::vector<AttributeDescription> selected_attributes(const RunConfig& config);
TemplateSpec sdg_template(const RunConfig& config);
TemplateSpec sdb_template(const RunConfig& config);

// Builds the single configured model. N-gram models trained from a
// corpus also get the template tokens in their vocabulary.
std::unique_ptr<LanguageModel> make_model(const RunConfig& config);

std::unique_ptr<AttributeScorer> make_scorer(const RunConfig& config);

}  // namespace sdlm::cli
