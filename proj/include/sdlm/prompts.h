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
#include <string_view>
#include <vector>

#include "sdlm/diagnosis.h"

namespace sdlm {

struct PromptRecord {
  std::string text;
  // Silver attribute scores in [0, 1], keyed by attribute name.
  std::map<std::string, double> scores;
  std::optional<std::string> id;
};

struct LoadOptions {
  // Skip malformed lines (recording a warning) instead of failing.
  bool skip_malformed = false;
};

// JSON-lines, one record per line:
//   {"text": "...", "scores": {"toxicity": 0.8, ...}, "id": "..."}
// Lines in the public RealToxicityPrompts layout are accepted too:
//   {"prompt": {"text": "...", "toxicity": 0.8, "severe_toxicity": ...},
//    "filename": "..."}
// where underscores in attribute names become spaces ("identity_attack"
// -> "identity attack") and null scores are dropped. Blank lines are
// ignored. Errors name the 1-based line number.
std::vector<PromptRecord> parse_prompts(std::string_view contents, const LoadOptions& options = {},
                                        std::vector<std::string>* warnings = nullptr);
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path,
                                       const LoadOptions& options = {},
                                       std::vector<std::string>* warnings = nullptr);

// One example per record, labeled by the 0.5 convention. InputError if a
// record lacks the attribute.
std::vector<LabeledExample> labeled_examples(std::span<const PromptRecord> records,
                                             const std::string& attribute);

// The n highest-scoring records (labeled true, descending) followed by
// the n lowest-scoring of the rest (labeled false, ascending). Ties go to
// the earlier record. InputError when 2n exceeds the record count or a
// record lacks the attribute.
std::vector<LabeledExample> select_extremes(std::span<const PromptRecord> records,
                                            const std::string& attribute, std::size_t n);

}  // namespace sdlm
