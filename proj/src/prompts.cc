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

#include "sdlm/prompts.h"

#include <algorithm>
#include <numeric>

#include <nlohmann/json.hpp>

#include "io_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

std::string attribute_key(std::string name) {
  std::replace(name.begin(), name.end(), '_', ' ');
  return name;
}

void add_score(PromptRecord& record, const std::string& name, const json& value,
               const std::string& where) {
  if (value.is_null()) return;
  if (!value.is_number()) throw FormatError(where + ": score \"" + name + "\" is not a number");
  const double score = value.get<double>();
  if (!(score >= 0.0 && score <= 1.0)) {
    throw ValidationError(where + ": score \"" + name + "\" = " + value.dump() +
                          " is outside [0, 1]");
  }
  record.scores[attribute_key(name)] = score;
}

PromptRecord parse_record(const std::string& line, const std::string& where) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(where + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError(where + ": expected a JSON object");

  PromptRecord record;
  if (doc.contains("text") && doc["text"].is_string()) {
    record.text = doc["text"].get<std::string>();
  } else if (doc.contains("prompt") && doc["prompt"].is_string()) {
    record.text = doc["prompt"].get<std::string>();
  } else if (doc.contains("prompt") && doc["prompt"].is_object() &&
             doc["prompt"].contains("text") && doc["prompt"]["text"].is_string()) {
    record.text = doc["prompt"]["text"].get<std::string>();
    for (const auto& [name, value] : doc["prompt"].items()) {
      if (name == "text") continue;
      if (value.is_number() || value.is_null()) add_score(record, name, value, where);
    }
  } else {
    throw FormatError(where + ": missing \"text\" or \"prompt\"");
  }

  if (doc.contains("scores")) {
    if (!doc["scores"].is_object()) throw FormatError(where + ": \"scores\" must be an object");
    for (const auto& [name, value] : doc["scores"].items()) add_score(record, name, value, where);
  }
  for (const char* key : {"id", "filename"}) {
    if (doc.contains(key) && doc[key].is_string()) {
      record.id = doc[key].get<std::string>();
      break;
    }
  }
  return record;
}

double score_of(const PromptRecord& record, const std::string& attribute, std::size_t index) {
  auto it = record.scores.find(attribute);
  if (it == record.scores.end()) {
    throw InputError("record " + std::to_string(index + 1) + " has no \"" + attribute +
                     "\" score");
  }
  return it->second;
}

}  // namespace

std::vector<PromptRecord> parse_prompts(std::string_view contents, const LoadOptions& options,
                                        std::vector<std::string>* warnings) {
  std::vector<PromptRecord> records;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto end = contents.find('\n', pos);
    if (end == std::string_view::npos) end = contents.size();
    std::string line(contents.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) {
      continue;
    }
    const std::string where = "line " + std::to_string(line_no);
    try {
      records.push_back(parse_record(line, where));
    } catch (const FormatError& e) {
      if (!options.skip_malformed) throw FormatError(e.what(), line_no);
      if (warnings) warnings->push_back(e.what());
    } catch (const ValidationError& e) {
      if (!options.skip_malformed) throw;
      if (warnings) warnings->push_back(e.what());
    }
  }
  return records;
}

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path,
                                       const LoadOptions& options,
                                       std::vector<std::string>* warnings) {
  const std::string contents = internal::read_file(path);
  try {
    return parse_prompts(contents, options, warnings);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<LabeledExample> labeled_examples(std::span<const PromptRecord> records,
                                             const std::string& attribute) {
  std::vector<LabeledExample> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    out.push_back(LabeledExample::from_score(records[i].text, score_of(records[i], attribute, i)));
  }
  return out;
}

std::vector<LabeledExample> select_extremes(std::span<const PromptRecord> records,
                                            const std::string& attribute, std::size_t n) {
  if (2 * n > records.size()) {
    throw InputError("cannot select " + std::to_string(n) + " + " + std::to_string(n) +
                     " extremes from " + std::to_string(records.size()) + " records");
  }
  std::vector<double> scores(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) scores[i] = score_of(records[i], attribute, i);

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::size_t> rest(order.begin() + n, order.end());
  std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return a < b;
  });

  std::vector<LabeledExample> out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({records[order[i]].text, scores[order[i]], true});
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({records[rest[i]].text, scores[rest[i]], false});
  }
  return out;
}

}  // namespace sdlm
