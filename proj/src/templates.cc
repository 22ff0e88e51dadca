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

#include "sdlm/templates.h"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "io_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

const std::string& attribute_value(const TemplateSpec& spec,
                                   const AttributeDescription& attribute) {
  if (spec.field == AttributeField::kKeyword) {
    if (attribute.keyword.empty()) {
      throw ConfigError("attribute \"" + attribute.name + "\" has no keyword");
    }
    return attribute.keyword;
  }
  if (attribute.description.empty()) {
    throw ConfigError("attribute \"" + attribute.name + "\" has no description");
  }
  return attribute.description;
}

}  // namespace

void TemplateSpec::validate() const {
  if (count_occurrences(body, kTextPlaceholder) != 1) {
    throw ConfigError("template must contain {text} exactly once");
  }
  if (count_occurrences(body, kAttributePlaceholder) != 1) {
    throw ConfigError("template must contain {attribute} exactly once");
  }
  if (answers.yes.empty() || answers.no.empty() || answers.yes == answers.no) {
    throw ConfigError("answer words must be nonempty and distinct");
  }
}

TemplateSpec sdg_template() {
  return {"\"{text}\"\nQuestion: Does the above text contain {attribute}?\nAnswer:",
          AttributeField::kDescription, {}};
}

TemplateSpec sdb_template() {
  return {"The following text contains {attribute}:\n{text}", AttributeField::kDescription, {}};
}

TemplateSpec sdb_keyword_template() {
  return {"({attribute}) {text}", AttributeField::kKeyword, {}};
}

std::string render(const TemplateSpec& spec, std::string_view text,
                   const AttributeDescription& attribute) {
  spec.validate();
  const std::string& value = attribute_value(spec, attribute);
  std::string_view body = spec.body;
  std::string out;
  out.reserve(body.size() + text.size() + value.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    if (body.substr(pos).starts_with(kTextPlaceholder)) {
      out += text;
      pos += kTextPlaceholder.size();
    } else if (body.substr(pos).starts_with(kAttributePlaceholder)) {
      out += value;
      pos += kAttributePlaceholder.size();
    } else {
      out += body[pos++];
    }
  }
  return out;
}

std::string render_sdg(std::string_view text, const AttributeDescription& attribute) {
  if (text.empty()) throw InputError("self-diagnosis input text is empty");
  return render(sdg_template(), text, attribute);
}

std::string render_sdb(std::string_view text, const AttributeDescription& attribute) {
  return render(sdb_template(), text, attribute);
}

std::string render_sdb_keyword(std::string_view text, const AttributeDescription& attribute) {
  return render(sdb_keyword_template(), text, attribute);
}

TokenSequence sdb_prefix_tokens(const TemplateSpec& spec, const AttributeDescription& attribute) {
  spec.validate();
  auto text_pos = spec.body.find(kTextPlaceholder);
  auto tail = std::string_view(spec.body).substr(text_pos + kTextPlaceholder.size());
  if (!std::all_of(tail.begin(), tail.end(),
                   [](unsigned char c) { return std::isspace(c) != 0; })) {
    throw ConfigError("self-debiasing template must end with {text}");
  }
  TemplateSpec head = spec;
  head.body = spec.body.substr(0, text_pos + kTextPlaceholder.size());
  return tokenize(render(head, "", attribute));
}

TemplateSpec load_template(const std::filesystem::path& path, AttributeField field,
                           AnswerWords answers) {
  std::string body;
  try {
    body = internal::read_file(path);
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  if (body.ends_with("\r\n")) {
    body.resize(body.size() - 2);
  } else if (body.ends_with('\n')) {
    body.pop_back();
  }
  TemplateSpec spec{std::move(body), field, std::move(answers)};
  spec.validate();
  return spec;
}

std::vector<AttributeDescription> default_registry() {
  return {
      {"toxicity", "rude, disrespectful or unreasonable language", "rude"},
      {"severe toxicity", "very hateful, aggressive, disrespectful language", "aggressive"},
      {"sexually explicit", "sexually explicit language", "sexually explicit"},
      {"threat", "a threat", "threat"},
      {"profanity", "swear words, curse words, or other obscene or profane language", ""},
      {"identity attack",
       "negative or hateful language targeting someone because of their identity", "hateful"},
  };
}

std::vector<AttributeDescription> keyword_registry() {
  std::vector<AttributeDescription> out;
  for (const char* kw : {"rude", "sexually explicit", "sexist", "racist", "hateful", "aggressive",
                         "violent", "threat"}) {
    out.push_back({kw, kw, kw});
  }
  return out;
}

const AttributeDescription& find_attribute(std::span<const AttributeDescription> registry,
                                           std::string_view name) {
  for (const auto& a : registry) {
    if (a.name == name) return a;
  }
  throw ConfigError("attribute \"" + std::string(name) + "\" is not in the registry");
}

std::vector<AttributeDescription> parse_registry(const std::string& json_text) {
  json doc = internal::parse_json(json_text, "registry");
  if (!doc.is_array()) throw FormatError("registry must be a JSON list");
  std::vector<AttributeDescription> registry;
  std::set<std::string> names;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    const std::string where = "registry entry " + std::to_string(i);
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("description") ||
        !entry["name"].is_string() || !entry["description"].is_string() ||
        (entry.contains("keyword") && !entry["keyword"].is_string())) {
      throw FormatError(where + ": expected {\"name\", \"description\", \"keyword\"} strings");
    }
    AttributeDescription a{entry["name"].get<std::string>(),
                           entry["description"].get<std::string>(),
                           entry.value("keyword", std::string())};
    if (a.name.empty()) throw ValidationError(where + ": empty name");
    if (a.description.empty()) throw ValidationError(where + ": empty description");
    if (!names.insert(a.name).second) {
      throw ValidationError(where + ": duplicate name \"" + a.name + "\"");
    }
    registry.push_back(std::move(a));
  }
  return registry;
}

std::vector<AttributeDescription> load_registry(const std::filesystem::path& path) {
  try {
    return parse_registry(internal::read_file(path));
  } catch (const DataError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_registry(std::span<const AttributeDescription> registry) {
  json doc = json::array();
  for (const auto& a : registry) {
    doc.push_back({{"name", a.name}, {"description", a.description}, {"keyword", a.keyword}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace sdlm
