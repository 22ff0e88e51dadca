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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sdlm/debias.h"
#include "sdlm/language_model.h"
#include "sdlm/prompts.h"
#include "sdlm/scorer.h"
#include "sdlm/templates.h"

namespace sdlm {

// Threshold comparison is inclusive.
inline constexpr double kExhibitThreshold = 0.5;

// Fraction of scores >= threshold. InputError when empty.
double empirical_attribute_probability(std::span<const double> scores,
                                       double threshold = kExhibitThreshold);
double empirical_attribute_probability(std::span<const std::string> texts,
                                       const AttributeScorer& scorer,
                                       const std::string& attribute,
                                       double threshold = kExhibitThreshold);

struct AttributeResult {
  std::size_t exhibit_count = 0;
  double probability = 0.0;
  // (baseline - probability) / baseline; empty when the baseline is 0.
  std::optional<double> relative_reduction;
};

struct EvalReport {
  DecodingConfig config;
  std::size_t total = 0;
  std::map<std::string, AttributeResult> attributes;
  std::optional<double> perplexity;
  std::vector<std::string> continuations;
};

struct EvalOptions {
  // Attributes scored on every continuation (report columns).
  std::vector<std::string> score_attributes;
  double threshold = kExhibitThreshold;
  // Scored with each config's attributes when set.
  std::optional<TokenSequence> perplexity_corpus;
  std::size_t perplexity_window = 992;
  std::size_t jobs = 1;
  // JSON-lines progress file. Completed (config, prompt) pairs found there
  // are reused; every new pair is appended and flushed as it completes.
  std::optional<std::filesystem::path> checkpoint;
  TemplateSpec sdb = sdb_template();
};

// Generates a continuation for every prompt under every config, scores
// the continuations (not the prompts), and reports per-attribute
// empirical probabilities. The first config is the baseline for relative
// reductions. Output is independent of `jobs`.
std::vector<EvalReport> run_generation_eval(const LanguageModel& model,
                                            std::span<const PromptRecord> prompts,
                                            std::span<const AttributeDescription> attributes,
                                            std::span<const DecodingConfig> configs,
                                            const AttributeScorer& scorer,
                                            const EvalOptions& options);

nlohmann::json to_json(const DecodingConfig& config);
nlohmann::json to_json(const EvalReport& report, bool include_continuations = false);

// Plain-text table: one row per config, one column per attribute, then
// perplexity. Reductions are shown as a down arrow with a percentage.
std::string render_table(std::span<const EvalReport> reports,
                         std::span<const std::string> attributes);

}  // namespace sdlm
