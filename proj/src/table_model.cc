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

#include "sdlm/table_model.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "io_util.h"
#include "sdlm/error.h"

namespace sdlm {

namespace {

using nlohmann::json;

NextTokenDistribution validate_row(const std::vector<double>& row, std::size_t vocab_size,
                                   const std::string& name) {
  if (row.size() != vocab_size) {
    throw ValidationError("row " + name + " has " + std::to_string(row.size()) +
                          " entries, vocabulary has " + std::to_string(vocab_size));
  }
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ValidationError("row " + name + " has an entry outside [0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTableRowSumTolerance) {
    throw ValidationError("row " + name + " sums to " + std::to_string(sum) + ", not 1");
  }
  if (std::abs(sum - 1.0) > kDistributionSumTolerance) {
    return NextTokenDistribution::normalized(row);
  }
  return NextTokenDistribution(row);
}

std::vector<double> read_row(const json& value, const std::string& name) {
  if (!value.is_array()) throw FormatError("row " + name + " is not an array");
  std::vector<double> row;
  row.reserve(value.size());
  for (const auto& entry : value) {
    if (!entry.is_number()) throw FormatError("row " + name + " has a non-numeric entry");
    row.push_back(entry.get<double>());
  }
  return row;
}

}  // namespace

TableModel::TableModel(TableModelSpec spec)
    : spec_(std::move(spec)),
      default_(validate_row(spec_.default_row, spec_.vocabulary.size(), "\"default\"")) {
  for (const auto& [key, row] : spec_.rows) {
    auto tokens = tokenize(key);
    if (tokens.empty()) throw ValidationError("row with an empty context key");
    std::string canonical = join_tokens(tokens);
    if (canonical != key) {
      throw ValidationError("row key \"" + key + "\" is not single-space separated");
    }
    lookup_.emplace(key, validate_row(row, spec_.vocabulary.size(), "\"" + key + "\""));
    longest_key_ = std::max(longest_key_, tokens.size());
  }
}

NextTokenDistribution TableModel::next_token_distribution(
    std::span<const std::string> context) const {
  std::size_t max_len = std::min(longest_key_, context.size());
  for (std::size_t len = max_len; len > 0; --len) {
    auto it = lookup_.find(join_tokens(context.last(len)));
    if (it != lookup_.end()) return it->second;
  }
  return default_;
}

TableModel parse_table_model(const std::string& json_text) {
  json doc = internal::parse_json(json_text, "table model");
  if (!doc.is_object()) throw FormatError("table model: top level must be an object");
  for (const char* key : {"vocab", "rows"}) {
    if (!doc.contains(key)) throw FormatError(std::string("table model: missing \"") + key + "\"");
  }
  if (!doc.contains("default")) throw ValidationError("table model: missing default row");
  if (!doc["vocab"].is_array()) throw FormatError("table model: \"vocab\" must be an array");
  std::vector<std::string> tokens;
  for (const auto& t : doc["vocab"]) {
    if (!t.is_string()) throw FormatError("table model: vocab entries must be strings");
    tokens.push_back(t.get<std::string>());
  }
  if (!doc["rows"].is_object()) throw FormatError("table model: \"rows\" must be an object");

  TableModelSpec spec{Vocabulary(std::move(tokens)), read_row(doc["default"], "\"default\""), {},
                      std::nullopt};
  for (const auto& [key, value] : doc["rows"].items()) {
    spec.rows.emplace(key, read_row(value, "\"" + key + "\""));
  }
  if (doc.contains("context_limit")) {
    const auto& limit = doc["context_limit"];
    if (!limit.is_number_unsigned() || limit.get<std::size_t>() == 0) {
      throw FormatError("table model: \"context_limit\" must be a positive integer");
    }
    spec.context_limit = limit.get<std::size_t>();
  }
  return TableModel(std::move(spec));
}

TableModel load_table_model(const std::filesystem::path& path) {
  try {
    return parse_table_model(internal::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.line());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string dump_table_model(const TableModelSpec& spec) {
  json doc;
  doc["vocab"] = spec.vocabulary.tokens();
  doc["default"] = spec.default_row;
  doc["rows"] = json::object();
  for (const auto& [key, row] : spec.rows) doc["rows"][key] = row;
  if (spec.context_limit) doc["context_limit"] = *spec.context_limit;
  return doc.dump(2) + "\n";
}

void save_table_model(const TableModelSpec& spec, const std::filesystem::path& path) {
  internal::write_file(path, dump_table_model(spec));
}

}  // namespace sdlm
