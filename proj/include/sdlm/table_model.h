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
#include <unordered_map>

#include "sdlm/language_model.h"

namespace sdlm {

// Explicit conditional table. Rows are keyed by space-joined context
// tokens; lookup takes the longest suffix of the context that has a row,
// falling back to the default row.
//
// Context tokens are matched as strings and need not belong to the
// vocabulary: the vocabulary is the output support only.
struct TableModelSpec {
  Vocabulary vocabulary;
  std::vector<double> default_row;
  std::map<std::string, std::vector<double>> rows;
  std::optional<std::size_t> context_limit;
};

class TableModel final : public LanguageModel {
 public:
  // Validates every row (length, range, sum within 1e-6) and renormalizes
  // rows whose sum is off by more than 1e-9. Throws ValidationError.
  explicit TableModel(TableModelSpec spec);

  const Vocabulary& vocabulary() const override { return spec_.vocabulary; }
  NextTokenDistribution next_token_distribution(
      std::span<const std::string> context) const override;
  std::optional<std::size_t> context_limit() const override { return spec_.context_limit; }

  const TableModelSpec& spec() const { return spec_; }

 private:
  TableModelSpec spec_;
  NextTokenDistribution default_;
  std::unordered_map<std::string, NextTokenDistribution> lookup_;
  std::size_t longest_key_ = 0;
};

// Tolerance on |row sum - 1| accepted when loading a table.
inline constexpr double kTableRowSumTolerance = 1e-6;

// File format:
//   {"vocab": [...], "default": [...], "rows": {"tok1 tok2": [...], ...}}
// plus an optional "context_limit" integer.
TableModel load_table_model(const std::filesystem::path& path);
TableModel parse_table_model(const std::string& json_text);
std::string dump_table_model(const TableModelSpec& spec);
void save_table_model(const TableModelSpec& spec, const std::filesystem::path& path);

}  // namespace sdlm
