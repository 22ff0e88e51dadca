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

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sdlm/vocabulary.h"

namespace sdlm {

// An undesired attribute: a short name, the phrase inserted into
// templates, and an optional keyword short form.
struct AttributeDescription {
  std::string name;
  std::string description;
  std::string keyword;

  bool operator==(const AttributeDescription&) const = default;
};

// Which AttributeDescription field fills the {attribute} placeholder.
enum class AttributeField { kDescription, kKeyword };

struct AnswerWords {
  std::string yes = "Yes";
  std::string no = "No";
};

// Template text with exactly one {text} and one {attribute} placeholder.
struct TemplateSpec {
  std::string body;
  AttributeField field = AttributeField::kDescription;
  AnswerWords answers;

  // Throws ConfigError if a placeholder is missing or repeated, or the
  // answer words are empty or equal.
  void validate() const;
};

inline constexpr std::string_view kTextPlaceholder = "{text}";
inline constexpr std::string_view kAttributePlaceholder = "{attribute}";

// "{text}"\nQuestion: Does the above text contain {attribute}?\nAnswer:
TemplateSpec sdg_template();
// The following text contains {attribute}:\n{text}
TemplateSpec sdb_template();
// ({attribute}) {text}, filled with the keyword.
TemplateSpec sdb_keyword_template();

// Single-pass substitution; placeholder-like text inside `text` or the
// attribute is copied verbatim. Throws ConfigError when the selected
// attribute field is empty.
std::string render(const TemplateSpec& spec, std::string_view text,
                   const AttributeDescription& attribute);

// Throws InputError for empty `text`.
std::string render_sdg(std::string_view text, const AttributeDescription& attribute);
std::string render_sdb(std::string_view text, const AttributeDescription& attribute);
// Throws ConfigError when the attribute has no keyword.
std::string render_sdb_keyword(std::string_view text, const AttributeDescription& attribute);

// Tokens that precede the input in a self-debiasing template, i.e. the
// tokenization of everything before {text}. The template must end with
// {text} (trailing whitespace allowed) so that continuation tokens can be
// appended to the context; otherwise ConfigError.
TokenSequence sdb_prefix_tokens(const TemplateSpec& spec, const AttributeDescription& attribute);

// Reads a UTF-8 template file verbatim (a single trailing newline is
// dropped) and validates it.
TemplateSpec load_template(const std::filesystem::path& path,
                           AttributeField field = AttributeField::kDescription,
                           AnswerWords answers = {});

// The six Perspective-style attributes. Keyword mapping:
//   toxicity -> "rude", severe toxicity -> "aggressive",
//   sexually explicit -> "sexually explicit", threat -> "threat",
//   identity attack -> "hateful"; profanity has no keyword.
std::vector<AttributeDescription> default_registry();

// One entry per keyword: "rude", "sexually explicit", "sexist", "racist",
// "hateful", "aggressive", "violent", "threat". Name, description and
// keyword are all the keyword itself.
std::vector<AttributeDescription> keyword_registry();

// Throws ConfigError naming the attribute when it is not registered.
const AttributeDescription& find_attribute(std::span<const AttributeDescription> registry,
                                           std::string_view name);

// Registry file: JSON list of {"name", "description", "keyword"}.
// Throws ValidationError on empty/duplicate names or empty descriptions.
std::vector<AttributeDescription> parse_registry(const std::string& json_text);
std::vector<AttributeDescription> load_registry(const std::filesystem::path& path);
std::string dump_registry(std::span<const AttributeDescription> registry);

}  // namespace sdlm
